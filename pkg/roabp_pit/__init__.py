from .common import RoabpError, Settings, load_settings  # noqa
from .roabp_core import DensePoly, Roabp, ShiftTuple, expand_dense  # noqa
from .nisan import SpanningProfile, build_profile, reconstruct, zero_test  # noqa
from .pit import SumInstance, decompose, equivalence_test, sum_zero_test  # noqa
from .concentration import WeightAssignment, blackbox_sum_pit, concentration_level  # noqa
