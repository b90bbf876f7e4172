"""contactlie: exact symbolic toolkit for contact Lie systems.

Exact rational-function arithmetic with exponential atoms, exterior calculus,
contact structures and their Hamiltonian machinery, Vessiot-Guldberg systems
with classification/projection/reduction, coalgebra-style superposition
integrals, and invariant-checked fixed-step integration.
"""

from .cartan import (CoordinateMap, KForm, VectorField, divergence, ext_d,
                     interior, lie_bracket, lie_derivative, pullback, wedge,
                     wedge_power)
from .charts import Chart, ExpAtom
from .contactgeo import (ContactStructure, HamiltonianPair, check_contact,
                         contact_bracket, darboux_hamiltonian_field,
                         energy_evolution, hamiltonian_field, hamiltonian_of,
                         is_good, reeb, symplectify)
from .definitions import (SystemDefinition, bundled_names, load_bundled,
                          load_definition, resolve_system,
                          serialize_definition)
from .dynamics import (MonitorReport, Trajectory, integrate,
                       monitor_first_integrals, monitor_polygon_area,
                       monitor_volume_transport, phase_portrait,
                       planar_equilibrium_report)
from .errors import (ClosureBoundExceeded, ExprSyntaxError, InputError,
                     InternalIdentityError, MathRejection, NotContactError,
                     NotHamiltonianError, NotProjectableError, PoleError,
                     ReductionPatternError, SchemaError, SingularFrameError,
                     ToolkitError, UnknownIdentifierError,
                     ZeroDenominatorError)
from .exprcore import (Poly, RationalExpr, eval_expr, eval_float, parse_expr,
                       partial, poly_gcd, substitute, to_string)
from .liealgebra import (DualElement, Frame, StructureConstants,
                         builtin_algebras, ce_delta, classify_algebra,
                         contact_condition_3d, dual_coframe, verify_structure)
from .liesystems import (TIME_CHART, MomentumMap, VGSystem,
                         classify_contact_system, lie_hamiltonian,
                         liouville_report, momentum_map, no_go_check,
                         project_conservative, reduce_level_set,
                         smallest_lie_algebra)
from .superposition import (FirstIntegralSet, Prolongation, casimir_integral,
                            casimir_sign_report, emit_superposition_system,
                            generate_integrals, product_bracket, rank_check,
                            sl2_casimir)

__version__ = "0.1.0"
