from .config import AuditConfig, config_from_dict, load_config
from .plots import plot_data, render_svg, write_plots
from .report import SKIP_DISCLOSURE, FairnessReport, PlotPoint, SopStep, from_json, render_certificate, to_json
from .sop import prepare_dataset, run_certification

__all__ = [
    "AuditConfig",
    "FairnessReport",
    "PlotPoint",
    "SKIP_DISCLOSURE",
    "SopStep",
    "config_from_dict",
    "from_json",
    "load_config",
    "plot_data",
    "prepare_dataset",
    "render_certificate",
    "render_svg",
    "run_certification",
    "to_json",
    "write_plots",
]
