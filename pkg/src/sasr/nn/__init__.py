from .mlp import Mlp, load_parameters, save_parameters
from .optim import AdamState, adam_step

__all__ = ["AdamState", "Mlp", "adam_step", "load_parameters", "save_parameters"]
