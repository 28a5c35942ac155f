"""Map-spec documents: JSON serialization of the built-in map variants.

Schema (version 1):

    {
      "schema_version": 1,
      "variant": "paper_example" | "horseshoe_core" | "rigid_translation",
      "alpha": {"value": "<repr>", "kind": "rigid"|"denjoy", "p": ..., "q": ...},
      "beta":  {...},                      # paper_example only
      "tolerances": {"denjoy_tol": "<repr>"}
    }

Values are stored as reprs of Python floats, so a round-trip reproduces the
construction bit for bit (decimal round-trip of repr is exact).
"""

from __future__ import annotations

import json

from .annulus import AnnulusMap, RigidTranslation
from .systems import HorseshoeCore, PaperExampleMap

SCHEMA_VERSION = 1


def to_document(m: AnnulusMap) -> dict:
    doc = {"schema_version": SCHEMA_VERSION}
    doc.update(m.to_config())
    return doc


def from_document(doc: dict) -> AnnulusMap:
    version = doc.get("schema_version")
    if version != SCHEMA_VERSION:
        raise ValueError(f"unsupported map-spec schema version: {version!r}")
    variant = doc.get("variant")
    if variant == "rigid_translation":
        return RigidTranslation(float(doc["alpha"]["value"]))
    if variant == "horseshoe_core":
        return HorseshoeCore()
    if variant == "paper_example":
        alpha = float(doc["alpha"]["value"])
        beta = float(doc["beta"]["value"])
        tol = float(doc.get("tolerances", {}).get("denjoy_tol", 1e-6))
        return PaperExampleMap(alpha, beta, tol)
    raise ValueError(f"unknown map variant: {variant!r}")


def save_map_spec(m: AnnulusMap, path) -> None:
    with open(path, "w") as fh:
        json.dump(to_document(m), fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_map_spec(path) -> AnnulusMap:
    with open(path) as fh:
        return from_document(json.load(fh))
