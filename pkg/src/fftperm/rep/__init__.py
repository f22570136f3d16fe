"""Exact representation-theoretic and lattice computations for small S_n."""

from .characters import (
    CapExceededError,
    InternalConsistencyError,
    character_ratio_max,
    character_table,
    class_size,
    conjugate_partition,
    dim_bound_report,
    fomin_lulov_check,
    hook_dimension,
    mn_character,
    partition_count,
    partitions,
    rectangular_class,
)
from .lattice import (
    alternating_sum,
    discrepancy,
    discrepancy_sign,
    from_lehmer_code,
    is_closed_under_covers,
    is_upper_set,
    lehmer_code,
    threshold_set,
)
