"""Block Markov superposition transmission of BCH codes.

A workbench for a convolutional-style FEC scheme that XORs interleaved
copies of the previous m component-coded blocks onto the current one and
decodes with an iterative sliding window passing only {0, 1, erasure}
messages.  Includes the quantized BPSK/AWGN channel, fast Monte Carlo
estimation of component-decoder statistics, a genie-aided error-floor
bound, and density evolution with threshold and coding-gain search.
"""

from .bch import BchCode, BchConstructionError, DecodeOutcome, bch_from_params, construct_bch
from .bounds import (
    channel_at,
    genie_channel,
    genie_lower_bound,
    ncg,
    shannon_ebn0_db,
    uncoded_ebn0_db,
)
from .channel import (
    BsecParams,
    ChannelConfig,
    bsec_from,
    mutual_information,
    optimize_threshold,
    q_function,
    sigma_from_ebn0,
    transmit,
)
from .codec import (
    BmstConfig,
    DecodeResult,
    bmst_encode,
    node_C_update,
    node_equal_to_C,
    node_equal_to_pi,
    node_plus_update,
    sliding_window_decode,
)
from .de import (
    DeConfig,
    DeResult,
    ProbTriple,
    ThresholdResult,
    de_node_C,
    de_node_equal_to_C,
    de_node_equal_to_plus,
    de_node_plus,
    de_run,
    de_threshold,
)
from .galois import (
    BinaryPolynomial,
    FieldElement,
    FieldTable,
    build_field,
    minimal_polynomial,
)
from .harness import (
    BerPoint,
    Candidate,
    ExperimentSpec,
    TableNodeC,
    code_search,
    decoding_latency,
    genie_single_layer,
    run_table_emulated,
    run_traditional,
)
from .tables import (
    MuLambdaTable,
    TableCoverageError,
    TableIntegrityError,
    bch_ber_over_bsec,
    build_table,
    estimate_mu_lambda,
    load_table,
    p_ij,
    save_table,
)
from .ternary import ERASE, box_plus, ternary, vote

__version__ = "0.1.0"
