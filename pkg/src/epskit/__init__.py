"""epskit: exact-rational error-free perfect-secrecy toolkit.

Constructs one-time pads, partition codes and compress-encrypt-pad
schemes over finite alphabets; verifies the defining secrecy constraints
and every supported bound exactly; accounts for multi-round key
consumption and residual-randomness extraction; and explores the
tradeoff between expected key consumption and channel uses.
"""

__version__ = "0.1.0"

from .ciphers import (
    CipherSpec,
    EncoderEntry,
    InvalidCiphertextError,
    PartitionCodeSpec,
    PrefixCode,
    build_compress_encrypt_pad,
    build_one_time_pad,
    build_partition_code,
    decrypt,
    encrypt,
    format_cipher,
    format_prefix_code,
    huffman_code,
    induced_joint,
    parse_cipher,
    partition_channel_uses,
    psi_exact,
    psi_floor,
    shannon_code,
)
from .eps_verifier import (
    BoundCheck,
    BoundReport,
    EpsReport,
    KeyMetrics,
    check_bounds,
    check_candidate_marginal,
    check_eps,
    key_metrics,
    min_entropy_floor_bits,
)
from .key_recycle import (
    Example2Scheme,
    ExtractionPlan,
    TwoRoundReport,
    build_example2,
    build_extraction,
    extraction_metrics,
    format_extraction_plan,
    max_target_preimages,
    scenario_independent_pads,
    scenario_message_reused_as_key,
    scenario_recycled_bit,
    simulate_two_rounds,
)
from .prob_core import (
    DivergenceInfiniteError,
    FiniteDist,
    InfoReport,
    JointSystem,
    TOL_BITS,
    as_mass,
    binary_entropy,
    entropy,
    format_dist,
    format_joint,
    info_report,
    is_independent,
    majorizes,
    parse_dist,
    parse_joint,
    relative_entropy,
)
from .tradeoff_search import (
    FeasibleWitness,
    SweepPoint,
    TradeoffPoint,
    enumerate_decoding_systems,
    frontier_table,
    pad_ciphertext,
    reduce_dependent_rows,
    reduce_to_square,
    sweep_table,
    theta_sweep,
    tradeoff_frontier,
    witness_joint,
)
