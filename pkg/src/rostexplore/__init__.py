"""Curiosity-driven grid exploration with a realtime online spatial topic model."""

from .grid import CellCoord, GridWorld, distance_sq
from .topic_model import Hyperparams, ModelSnapshot, TopicModel
from .generative import GenConfig, sample_dirichlet, sample_world
from .explorer import Path, Policy, choose_step, explore, step_weights
from .evaluation import (
    LabelMap, batch_label, entropy, label_with_model, mutual_information, sweep,
)

__version__ = "0.1.0"
