from .ablation import STUDIES, AblationRow, run_ablation, study_cells, write_ablation_csv
from .bench import (
    BenchRow,
    SlopeRow,
    SpaceRow,
    run_bench,
    scaling_slopes,
    slope_table,
    space_table,
    write_bench_csv,
)
from .density_maps import (
    BinVarianceShift,
    DensityWindow,
    VarianceRow,
    busiest_bin_variance,
    density_windows,
    load_visits,
    reward_variance_trend,
    run_density,
    write_density_csv,
)
from .evaluate import evaluate_checkpoint, write_eval_csv
from .records import RunRecord, read_train_csv, write_train_csv
from .runs import run_seed, run_seeds

__all__ = [
    "STUDIES",
    "AblationRow",
    "BenchRow",
    "BinVarianceShift",
    "DensityWindow",
    "RunRecord",
    "SlopeRow",
    "SpaceRow",
    "VarianceRow",
    "busiest_bin_variance",
    "density_windows",
    "evaluate_checkpoint",
    "load_visits",
    "read_train_csv",
    "reward_variance_trend",
    "run_ablation",
    "run_bench",
    "run_density",
    "run_seed",
    "run_seeds",
    "scaling_slopes",
    "slope_table",
    "space_table",
    "study_cells",
    "write_ablation_csv",
    "write_bench_csv",
    "write_density_csv",
    "write_eval_csv",
    "write_train_csv",
]
