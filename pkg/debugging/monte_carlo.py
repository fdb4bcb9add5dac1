"""
Monte Carlo diagnostics for the noise-perturbed distillation loss
"""
import logging
from typing import Any, Dict, List, Optional

import numpy as np

from autodiff.rng import Rng
from autodiff.tensor import Tensor, no_tape
from data_models.models import DistillMethod, TrainConfig
from distill.distiller import Distiller
from distill.losses import inject_image_noise
from harness.training import AUX_STREAM, INIT_STREAM, load_teacher
from nn.checkpoint import load_checkpoint, load_into
from nn.network import SmallCNN, forward, init_params
from synthtask.dataset import generate_dataset, stack_samples

logger = logging.getLogger(__name__)


class NoiseMonteCarlo:
    """Re-evaluates a noisy distillation loss on one fixed batch under fresh noise draws.

    With image injection every draw perturbs ``images`` and reruns ``student``,
    so both are required in that case.
    """

    def __init__(
        self,
        distiller: Distiller,
        teacher_feature: Tensor,
        student_feature: Optional[Tensor],
        student: Optional[SmallCNN] = None,
        images: Optional[Tensor] = None,
    ):
        if distiller.method not in (DistillMethod.GDD, DistillMethod.SN_ONLY, DistillMethod.MGD):
            raise ValueError(f"method '{distiller.method.value}' has no stochastic term to resample")
        if distiller.image_noise and (student is None or images is None):
            raise ValueError("image noise injection needs the student network and its input batch")
        self.distiller = distiller
        self.teacher_feature = teacher_feature
        self.student_feature = student_feature
        self.student = student
        self.images = images
        self.debug_runs: List[Dict[str, Any]] = []

    def _student_feature(self, rng: Rng) -> Tensor:
        if not self.distiller.image_noise:
            return self.student_feature
        _, feature = forward(self.student, inject_image_noise(self.images, self.distiller.cfg, rng))
        return feature

    def run_simulation(self, num_simulations: int = 100, seed: int = 0) -> Dict[str, Any]:
        """Loss statistics over num_simulations independent noise streams."""
        logger.info(f"Starting noise resampling with {num_simulations} draws")
        root = Rng(seed)
        values = []
        with no_tape():
            for simulation in range(num_simulations):
                rng = root.spawn(simulation)
                value = self.distiller.loss(
                    rng,
                    teacher_feature=self.teacher_feature,
                    student_feature=self._student_feature(rng),
                ).item()
                values.append(value)
                self.debug_runs.append({"simulation": simulation, "loss": value})
        arr = np.asarray(values)
        signs = np.sign(arr)
        results = {
            "draws": num_simulations,
            "mean": float(arr.mean()),
            "std": float(arr.std(ddof=1)) if num_simulations > 1 else 0.0,
            "min": float(arr.min()),
            "max": float(arr.max()),
            "sign_consistent": bool(np.all(signs == signs[0])),
        }
        logger.info(f"Noise resampling done: mean={results['mean']:.6f} std={results['std']:.6f}")
        return results

    def generate_debug_report(self) -> str:
        report = []
        report.append("=" * 50)
        report.append("NOISE RESAMPLING REPORT")
        report.append("=" * 50)
        report.append(f"Method: {self.distiller.method.value}")
        report.append(f"Draws: {len(self.debug_runs)}")
        if self.debug_runs:
            losses = np.asarray([r["loss"] for r in self.debug_runs])
            report.append(f"Mean loss: {losses.mean():.6f}")
            report.append(f"Std loss:  {losses.std(ddof=1) if len(losses) > 1 else 0.0:.6f}")
            report.append(f"Min loss:  {losses.min():.6f}")
            report.append(f"Max loss:  {losses.max():.6f}")
            report.append(f"Negative draws: {int((losses < 0).sum())}")
        report.append("=" * 50)
        return "\n".join(report)


def diagnose_config(cfg: TrainConfig, num_simulations: int = 100, student_checkpoint: Optional[str] = None) -> NoiseMonteCarlo:
    """Build the first training batch of cfg and resample the distillation noise on it."""
    if not cfg.teacher_checkpoint:
        raise ValueError("noise diagnostic needs teacher_checkpoint")
    teacher = load_teacher(cfg.teacher_checkpoint)
    root = Rng(cfg.seed)
    student = SmallCNN(cfg.widths, cfg.dataset.num_classes, feature_tap=cfg.feature_tap)
    init_params(student, root.spawn(INIT_STREAM))
    if student_checkpoint:
        load_into(student, load_checkpoint(student_checkpoint))

    train, _ = generate_dataset(cfg.dataset)
    images, _ = stack_samples(train[: cfg.sgd.batch_size])
    x = Tensor(images)
    with no_tape():
        _, teacher_feature = forward(teacher, x)
        _, student_feature = forward(student, x)
    distiller = Distiller(cfg.distill, student.feature_channels, teacher.feature_channels, rng=root.spawn(AUX_STREAM))
    mc = NoiseMonteCarlo(distiller, teacher_feature, student_feature, student=student, images=x)
    mc.run_simulation(num_simulations, seed=cfg.seed)
    return mc
