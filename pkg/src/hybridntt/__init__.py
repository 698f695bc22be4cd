"""Functional model of a hybrid-dataflow negacyclic NTT engine.

Modules:
  modmath        canonical modular arithmetic, root discovery, twiddle tables
  reference      golden transforms, schoolbook negacyclic product, HPLY files
  fragmentation  XOR bank mapping plus conflict/burst certification
  dataflow       bit-exact functional simulation of the staged engine
  twiddles       per-unit twiddle assignment and replication accounting
  perfmodel      roofline intensity, cycle, throughput, bandwidth model
  cli            command-line front end
"""

from .dataflow import (
    BUTTERFLY,
    SWAP,
    EngineConfig,
    ModeSchedule,
    audit_trace,
    butterfly,
    classify_stages,
    mode_schedule,
    run_transform,
)
from .fragmentation import (
    BadConfig,
    BankLayout,
    access_schedule,
    map_layout,
    verify_burst,
    verify_conflict_free,
)
from .modmath import (
    ModulusContext,
    NoPrimeFound,
    NotNttFriendly,
    PrimeModulus,
    ShoupPair,
    add_mod,
    build_context,
    find_ntt_prime,
    find_primitive_2n_root,
    mul_mod_shoup,
    precompute_shoup,
    sub_mod,
)
from .perfmodel import (
    ArchKind,
    PerfReport,
    RooflineParams,
    bandwidth_demand,
    cycle_estimate,
    intensity,
    peak_throughput,
    roofline_table,
)
from .reference import (
    ContextMismatch,
    Polynomial,
    naive_negacyclic_mul,
    pointwise_mul,
    random_polynomial,
    read_polynomial,
    reference_forward_ntt,
    reference_inverse_ntt,
    splitmix64,
    write_polynomial,
)
from .twiddles import (
    ReplicationStats,
    TwiddleAssignment,
    arrange_twiddles,
    distinct_engine_factors,
    replication_report,
)

__version__ = "0.1.0"
