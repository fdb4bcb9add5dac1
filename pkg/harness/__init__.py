from harness.report import collect_reports, compare_class_iou, emit_report, load_report, run_row, write_sweep
from harness.sweep import MODULE_ABLATION_ARMS, NOISE_GRID, run_sweep
from harness.training import evaluate, load_teacher, train_student, train_teacher

__all__ = [
    "MODULE_ABLATION_ARMS",
    "NOISE_GRID",
    "collect_reports",
    "compare_class_iou",
    "emit_report",
    "evaluate",
    "load_report",
    "load_teacher",
    "run_row",
    "run_sweep",
    "train_student",
    "train_teacher",
    "write_sweep",
]
