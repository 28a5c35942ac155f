"""Command-line interface.

Subcommands:
  example build   emit a map-spec document
  orbit           lifted orbit segment + Birkhoff average
  basin           semi-decidable basin classification
  chain           box digraph -> chain classes (CSV + SVG raster)
  lyapunov        combinatorial Lyapunov summary for a grid
  rot             periodic | interval | power | atkinson | prime-end
  periodic        certified periodic-point search
  index           fixed point index along a square loop
  oracle          exact symbolic periodic point of the horseshoe

Every output embeds the invoking configuration (including the sampling
seed), so identical invocations produce byte-identical artifacts.  Exit
codes: 0 ok, 2 bad configuration, 3 numeric failure, 4 partial result.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction

from . import mapspec, svg
from .annulus import (Basin, LiftPoint, RigidTranslation, birkhoff_rotation,
                      classify_basin, orbit)
from .conley import Grid, attractor_pairs, chain_classes, lyapunov, transition_graph
from .errors import AnnulusDynError
from .rotation import (atkinson_small_sums, power_rotation_check,
                       prime_end_rotation_estimate, rotation_interval_of_class,
                       rotation_of_periodic)
from .search import (find_fixed_points_of_power, fixed_point_index, folded_power,
                     square_loop)
from .systems import (build_horseshoe_core, build_paper_example,
                      horseshoe_symbolic_point)

OK, CONFIG_ERROR, NUMERIC_FAILURE, PARTIAL = 0, 2, 3, 4


def parse_real(text: str) -> float:
    """Accept decimals and fractions like 1/3."""
    if "/" in text:
        return float(Fraction(text))
    return float(text)


def parse_window(text: str):
    parts = [float(v) for v in text.split(",")]
    if len(parts) != 4:
        raise ValueError("window must be x_lo,x_hi,t_lo,t_hi")
    return tuple(parts)


def _map_from_args(args):
    if getattr(args, "spec", None):
        return mapspec.load_map_spec(args.spec)
    variant = getattr(args, "variant", None)
    if variant in ("paper", "paper_example"):
        return build_paper_example(parse_real(args.alpha), parse_real(args.beta),
                                   args.tol)
    if variant in ("horseshoe", "horseshoe_core"):
        return build_horseshoe_core()
    if variant in ("rigid", "rigid_translation"):
        return RigidTranslation(parse_real(args.alpha))
    raise ValueError("provide --spec or --variant")


def _config_of(args) -> dict:
    skip = {"func"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip}


def _emit(args, payload: dict, code: int = OK) -> int:
    doc = {"config": _config_of(args), "result": payload}
    text = json.dumps(doc, indent=2, sort_keys=True) + "\n"
    if getattr(args, "output", None):
        with open(args.output, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return code


def cmd_example(args):
    m = _map_from_args(args)
    doc = mapspec.to_document(m)
    doc["config"] = _config_of(args)
    text = json.dumps(doc, indent=2, sort_keys=True) + "\n"
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return OK


def cmd_orbit(args):
    m = _map_from_args(args)
    pts = orbit(m, LiftPoint(args.x, args.t), args.n, args.direction)
    res = birkhoff_rotation(m, LiftPoint(args.x, args.t), args.n, args.direction)
    payload = {
        "points": [[p.x, p.t] for p in pts],
        "birkhoff": res.value,
        "steps": res.steps,
        "complete": res.complete,
    }
    return _emit(args, payload, OK if res.complete else PARTIAL)


def cmd_basin(args):
    m = _map_from_args(args)
    basin = classify_basin(m, LiftPoint(args.x, args.t), args.t_hi, args.t_lo,
                           args.max_iter)
    code = OK if basin in (Basin.PLUS, Basin.MINUS, Basin.BOTH) else PARTIAL
    return _emit(args, {"basin": basin.value}, code)


def cmd_chain(args):
    m = _map_from_args(args)
    grid = Grid(parse_window(args.window), args.depth)
    eps = "auto" if args.eps == "auto" else float(args.eps)
    dg = transition_graph(m, grid, eps, seed=args.seed)
    dec = chain_classes(dg)
    ly = lyapunov(dg)
    header = json.dumps(_config_of(args), sort_keys=True)
    lines = [f"# config: {header}",
             f"# eps: {dg.eps!r}",
             "box_id,ix,it,class_id,recurrent,lyapunov"]
    labels = dec.labels
    rec = dec.recurrent_mask
    for box in range(dg.n_boxes):
        ix, it = divmod(box, grid.ny)
        c = labels[box]
        lines.append(f"{box},{ix},{it},{c},{int(rec[c])},{float(ly.box_values[box])!r}")
    csv_text = "\n".join(lines) + "\n"
    if args.csv:
        with open(args.csv, "w") as fh:
            fh.write(csv_text)
    if args.svg:
        rows = [(b, labels[b]) for b in dec.recurrent_boxes()]
        with open(args.svg, "w") as fh:
            fh.write(svg.render_boxes(grid, rows, comment=header))
    n_rec = len(dec.recurrent_classes())
    payload = {"n_boxes": dg.n_boxes, "n_edges": dg.n_edges,
               "n_classes": dec.n_classes, "n_recurrent_classes": n_rec,
               "eps": dg.eps}
    return _emit(args, payload)


def cmd_lyapunov(args):
    m = _map_from_args(args)
    grid = Grid(parse_window(args.window), args.depth)
    eps = "auto" if args.eps == "auto" else float(args.eps)
    dg = transition_graph(m, grid, eps, seed=args.seed)
    dec = chain_classes(dg)
    ly = lyapunov(dg)
    src = dg.edge_sources()
    lu = dec.labels[src]
    lv = dec.labels[dg.indices]
    cross = lu != lv
    strict = bool((ly.node_values[lu[cross]] > ly.node_values[lv[cross]]).all())
    payload = {
        "digits": ly.digits,
        "plateaus": {str(c.class_id): ly.plateau(c.class_id)
                     for c in dec.recurrent_classes()},
        "strict_decrease": strict,
    }
    analysis = attractor_pairs(dg) if args.attractors else None
    if analysis is not None:
        payload["attractor_pairs"] = len(analysis.pairs)
        payload["enumeration_complete"] = analysis.complete
        payload["identity_holds"] = analysis.identity_holds
        if not analysis.complete:
            return _emit(args, payload, PARTIAL)
    return _emit(args, payload)


def cmd_rot_periodic(args):
    m = _map_from_args(args)
    rot = rotation_of_periodic(m, LiftPoint(args.x, args.t), args.q, args.rot_tol)
    return _emit(args, {"p": rot.p, "q": rot.q, "value": rot.value})


def cmd_rot_interval(args):
    m = _map_from_args(args)
    grid = Grid(parse_window(args.window), args.depth)
    eps = "auto" if args.eps == "auto" else float(args.eps)
    dg = transition_graph(m, grid, eps, seed=args.seed)
    dec = chain_classes(dg)
    box = grid.box_of(args.x, args.t)
    if box < 0:
        raise ValueError("point outside window")
    cls = dec[dec.class_of_box(box)]
    iv = rotation_interval_of_class(dg, cls)
    return _emit(args, {"class_id": cls.class_id, "boxes": len(cls),
                        "lo": iv.lo, "hi": iv.hi, "eps": dg.eps})


def cmd_rot_power(args):
    m = _map_from_args(args)
    grid = Grid(parse_window(args.window), args.depth)
    eps = "auto" if args.eps == "auto" else float(args.eps)
    dg = transition_graph(m, grid, eps, seed=args.seed)
    dec = chain_classes(dg)
    box = grid.box_of(args.x, args.t)
    cls = dec[dec.class_of_box(box)]
    rep = power_rotation_check(m, dg, cls, args.q, args.slack)
    payload = {"q": rep.q,
               "base": [rep.base_interval.lo, rep.base_interval.hi],
               "power": [rep.power_interval.lo, rep.power_interval.hi],
               "deviation": rep.deviation, "passed": rep.passed}
    return _emit(args, payload, OK if rep.passed else NUMERIC_FAILURE)


def cmd_rot_atkinson(args):
    m = _map_from_args(args)
    hits = atkinson_small_sums(m, LiftPoint(args.x, args.t), args.p, args.q,
                               args.eps, args.n_max)
    return _emit(args, {"hits": hits, "count": len(hits)})


def cmd_rot_prime_end(args):
    m = _map_from_args(args)
    plus = prime_end_rotation_estimate(m, LiftPoint(args.seed_x, args.seed_t_plus),
                                       args.n, "plus")
    minus = prime_end_rotation_estimate(m, LiftPoint(args.seed_x, args.seed_t_minus),
                                        args.n, "minus")
    return _emit(args, {"plus": plus, "minus": minus, "n": args.n})


def cmd_periodic(args):
    m = _map_from_args(args)
    orbits = find_fixed_points_of_power(m, args.q, args.p,
                                        parse_window(args.window),
                                        depth=args.depth, tol=args.res_tol)
    payload = {"count": len(orbits),
               "orbits": [{"point": [o.point.x, o.point.t],
                           "residual": o.residual,
                           "index": o.index,
                           "rotation": str(o.rotation)} for o in orbits],
               "certificate_of_absence": False}
    return _emit(args, payload)


def cmd_index(args):
    if args.word is not None:
        core = build_horseshoe_core()
        F, fixed, p = core.branch_extension(args.word)
        center = (fixed.x, fixed.t) if args.x is None else (args.x, args.t)
    else:
        m = _map_from_args(args)
        F = folded_power(m, args.q, args.p)
        center = (args.x, args.t)
    loop = square_loop(center, args.radius)
    idx = fixed_point_index(F, loop, samples=args.samples)
    return _emit(args, {"index": idx, "center": list(center),
                        "radius": args.radius})


def cmd_oracle(args):
    pt, p = horseshoe_symbolic_point(args.word)
    payload = {"word": args.word,
               "theta": str(pt[0]), "t": str(pt[1]),
               "p": p, "q": len(args.word),
               "rotation": f"{p}/{len(args.word)}"}
    return _emit(args, payload)


def _add_map_args(sp, need_variant=False):
    sp.add_argument("--spec", help="map-spec JSON path")
    sp.add_argument("--variant", choices=["paper", "horseshoe", "rigid"],
                    required=need_variant)
    sp.add_argument("--alpha", default="0", help="decimal or p/q")
    sp.add_argument("--beta", default="0", help="decimal or p/q")
    sp.add_argument("--tol", type=float, default=1e-6)


def _add_grid_args(sp):
    sp.add_argument("--window", default="0,0.25,-0.25,0")
    sp.add_argument("--depth", type=int, default=8)
    sp.add_argument("--eps", default="auto")
    sp.add_argument("--seed", type=int, default=0)


def build_parser():
    ap = argparse.ArgumentParser(prog="annulusdyn", description=__doc__,
                                 formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = ap.add_subparsers(dest="command", required=True)

    ex = sub.add_parser("example", help="built-in example systems")
    exsub = ex.add_subparsers(dest="subcommand", required=True)
    exb = exsub.add_parser("build", help="emit a map-spec document")
    _add_map_args(exb, need_variant=True)
    exb.add_argument("-o", "--output")
    exb.set_defaults(func=cmd_example)

    ob = sub.add_parser("orbit", help="orbit segment + Birkhoff average")
    _add_map_args(ob)
    ob.add_argument("--x", type=float, required=True)
    ob.add_argument("--t", type=float, required=True)
    ob.add_argument("--n", type=int, default=100)
    ob.add_argument("--direction", choices=["forward", "backward"],
                    default="forward")
    ob.add_argument("-o", "--output")
    ob.set_defaults(func=cmd_orbit)

    ba = sub.add_parser("basin", help="basin classification")
    _add_map_args(ba)
    ba.add_argument("--x", type=float, required=True)
    ba.add_argument("--t", type=float, required=True)
    ba.add_argument("--t-hi", type=float, default=15.0)
    ba.add_argument("--t-lo", type=float, default=-15.0)
    ba.add_argument("--max-iter", type=int, default=10000)
    ba.add_argument("-o", "--output")
    ba.set_defaults(func=cmd_basin)

    ch = sub.add_parser("chain", help="chain classes on a box grid")
    _add_map_args(ch)
    _add_grid_args(ch)
    ch.add_argument("--csv")
    ch.add_argument("--svg")
    ch.add_argument("-o", "--output")
    ch.set_defaults(func=cmd_chain)

    lyp = sub.add_parser("lyapunov", help="Lyapunov plateaus and checks")
    _add_map_args(lyp)
    _add_grid_args(lyp)
    lyp.add_argument("--attractors", action="store_true",
                     help="also run the attractor-pair identity check")
    lyp.add_argument("-o", "--output")
    lyp.set_defaults(func=cmd_lyapunov)

    rot = sub.add_parser("rot", help="rotation quantities")
    rotsub = rot.add_subparsers(dest="subcommand", required=True)

    rp = rotsub.add_parser("periodic")
    _add_map_args(rp)
    rp.add_argument("--x", type=float, required=True)
    rp.add_argument("--t", type=float, required=True)
    rp.add_argument("--q", type=int, required=True)
    rp.add_argument("--rot-tol", type=float, default=1e-6)
    rp.add_argument("-o", "--output")
    rp.set_defaults(func=cmd_rot_periodic)

    ri = rotsub.add_parser("interval")
    _add_map_args(ri)
    _add_grid_args(ri)
    ri.add_argument("--x", type=float, default=0.0)
    ri.add_argument("--t", type=float, default=0.0)
    ri.add_argument("-o", "--output")
    ri.set_defaults(func=cmd_rot_interval)

    rw = rotsub.add_parser("power")
    _add_map_args(rw)
    _add_grid_args(rw)
    rw.add_argument("--x", type=float, default=0.0)
    rw.add_argument("--t", type=float, default=0.0)
    rw.add_argument("--q", type=int, required=True)
    rw.add_argument("--slack", type=float, default=0.3)
    rw.add_argument("-o", "--output")
    rw.set_defaults(func=cmd_rot_power)

    ra = rotsub.add_parser("atkinson")
    _add_map_args(ra)
    ra.add_argument("--x", type=float, required=True)
    ra.add_argument("--t", type=float, required=True)
    ra.add_argument("--p", type=int, required=True)
    ra.add_argument("--q", type=int, required=True)
    ra.add_argument("--eps", type=float, required=True)
    ra.add_argument("--n-max", type=int, default=1000)
    ra.add_argument("-o", "--output")
    ra.set_defaults(func=cmd_rot_atkinson)

    rpe = rotsub.add_parser("prime-end")
    _add_map_args(rpe)
    rpe.add_argument("--n", type=int, default=10000)
    rpe.add_argument("--seed-x", type=float, default=0.0)
    rpe.add_argument("--seed-t-plus", type=float, default=20.0)
    rpe.add_argument("--seed-t-minus", type=float, default=-20.0)
    rpe.add_argument("-o", "--output")
    rpe.set_defaults(func=cmd_rot_prime_end)

    pe = sub.add_parser("periodic", help="periodic point search")
    _add_map_args(pe)
    pe.add_argument("--p", type=int, required=True)
    pe.add_argument("--q", type=int, required=True)
    pe.add_argument("--window", default="0,0.25,-0.25,0")
    pe.add_argument("--depth", type=int, default=8)
    pe.add_argument("--res-tol", type=float, default=1e-10)
    pe.add_argument("-o", "--output")
    pe.set_defaults(func=cmd_periodic)

    ix = sub.add_parser("index", help="fixed point index")
    _add_map_args(ix)
    ix.add_argument("--word", help="horseshoe branch word (affine extension)")
    ix.add_argument("--q", type=int, default=1)
    ix.add_argument("--p", type=int, default=0)
    ix.add_argument("--x", type=float)
    ix.add_argument("--t", type=float)
    ix.add_argument("--radius", type=float, default=0.05)
    ix.add_argument("--samples", type=int, default=1024)
    ix.add_argument("-o", "--output")
    ix.set_defaults(func=cmd_index)

    orc = sub.add_parser("oracle", help="exact horseshoe symbolic point")
    orc.add_argument("--word", required=True)
    orc.add_argument("-o", "--output")
    orc.set_defaults(func=cmd_oracle)

    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    # prime-end defaults to the paper family when no map source is given
    if getattr(args, "func", None) is cmd_rot_prime_end and not args.spec \
            and args.variant is None:
        args.variant = "paper"
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return CONFIG_ERROR
    except AnnulusDynError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return NUMERIC_FAILURE


if __name__ == "__main__":
    sys.exit(main())
