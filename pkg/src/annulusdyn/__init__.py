"""Annulus homeomorphisms, rotation numbers, and grid-level chain recurrence.

The library builds two families of lifted annulus homeomorphisms with
known rotation behaviour (a twist family with prescribed end rotation
numbers and an exact winding-horseshoe core), and provides the analysis
toolkit around them: circle-lift machinery including Denjoy-type maps,
Birkhoff rotation averages and basin classification, outer-approximation
box digraphs with chain classes and combinatorial Lyapunov functions,
rotation intervals from extremal cycle means, certified periodic-point
search, fixed point indices, and the delta-chain index calculus.
"""

from .annulus import (AnnulusMap, AnnulusPoint, Basin, BirkhoffResult, LiftPoint,
                      RigidTranslation, annulus_dist, birkhoff_rotation,
                      classify_basin, deck, displacement, lift_of, orbit, project)
from .circle import (CircleLift, make_denjoy, make_rigid_rotation,
                     rotation_number_estimate)
from .conley import (AttractorAnalysis, AttractorPair, BoxDigraph, ChainClass,
                     ChainDecomposition, Grid, GridLyapunov, attractor_pairs,
                     chain_classes, is_cantor_endpoint, lyapunov, transition_graph)
from .errors import (AmbiguousLiftError, AnnulusDynError, InvalidChainError,
                     ItineraryViolationError, NearRationalError, NoConvergenceError,
                     NotInBasinError, NotLiftedError, NotPeriodicError,
                     OutOfDomainError, UnresolvedWindingError, ZeroOnBoundaryError)
from .mapspec import from_document, load_map_spec, save_map_spec, to_document
from .rotation import (PowerCheckReport, PowerMap, RationalRot, RotationInterval,
                       atkinson_small_sums, power_rotation_check,
                       prime_end_rotation_estimate, rotation_interval_of_boxes,
                       rotation_interval_of_class, rotation_of_periodic)
from .search import (PeriodicOrbit, chain_dynamical_index, concat_solver,
                     find_fixed_points_of_power, fixed_point_index, folded_power,
                     square_loop)
from .systems import (HorseshoeCore, PaperExampleMap, build_horseshoe_core,
                      build_paper_example, horseshoe_heteroclinic_chain,
                      horseshoe_symbolic_point, is_valid_chain)

__version__ = "0.1.0"
