from .kernels import active_backend, loss_and_grad, total_loss
from .optim import (
    OptimizerConfig,
    TrajectoryBatch,
    advantage_broadcast,
    assemble_batch,
    grpo_advantages,
    grpo_update,
    imitation_loss,
    ppo_update,
)
from .toy import ACTIONS, NUM_ACTIONS, NUM_STATES, ToyPolicy, state_index

__all__ = [
    "active_backend",
    "loss_and_grad",
    "total_loss",
    "OptimizerConfig",
    "TrajectoryBatch",
    "advantage_broadcast",
    "assemble_batch",
    "grpo_advantages",
    "grpo_update",
    "imitation_loss",
    "ppo_update",
    "ACTIONS",
    "NUM_ACTIONS",
    "NUM_STATES",
    "ToyPolicy",
    "state_index",
]
