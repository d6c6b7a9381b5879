"""Policy: feature encoding, parameters, and the rollout kernels."""

from .backend import BACKEND, get_backend
from .features import FeatureSpec, static_context_row, write_dynamic_slots
from .params import (
    AdamState,
    Checkpoint,
    CheckpointError,
    PolicyParams,
    load_checkpoint,
    save_checkpoint,
)
from .rollout import (
    AnswerRecord,
    CandidateSet,
    chain_logps,
    chain_logps_and_grad,
    greedy_chain,
    replay_features,
    sample_chain,
)
