from .config import ExperimentConfig, dump_config, load_config, parse_config
from .experiments import cmd_denoise, cmd_learn, cmd_sweep
from .plotting import cmd_plot, read_svg_series

__all__ = [
    "ExperimentConfig", "dump_config", "load_config", "parse_config",
    "cmd_denoise", "cmd_learn", "cmd_sweep", "cmd_plot", "read_svg_series",
]
