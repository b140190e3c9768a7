"""Numpy deep-RL toolkit: MLPs, Adam, replay, SAC, DQN and DDPG."""
from .adam import AdamState, NonFiniteGradient, adam_step
from .baselines import DdpgAgent, DqnAgent, ddpg_update, dqn_update
from .checkpoint import load_agent, load_networks, save_agent, save_networks
from .mlp import Mlp, backward, forward
from .replay import Batch, ReplayBuffer, Transition
from .sac import (ActionSpec, LossInfo, SacAgent, UpdateAborted, sac_update, sac_update_continuous,
                  sac_update_discrete, soft_update)

__all__ = [
    "ActionSpec", "AdamState", "Batch", "DdpgAgent", "DqnAgent", "LossInfo", "Mlp", "NonFiniteGradient",
    "ReplayBuffer", "SacAgent", "Transition", "UpdateAborted", "adam_step", "backward", "ddpg_update",
    "dqn_update", "forward", "load_agent", "load_networks", "sac_update", "sac_update_continuous",
    "sac_update_discrete", "save_agent", "save_networks", "soft_update",
]
