"""
Teacher and student training loops.

A student step follows the distillation algorithm: student forward (logits,
feature), frozen teacher forward, distillation loss for the configured method,
L = L_task + alpha * L_distill, one backward pass, one SGD step over the
student plus the align/generator auxiliaries.

Random streams derive from Rng(cfg.seed): spawn(0) student init, spawn(1)
auxiliary init, spawn(2) batch order, spawn(3) noise and masks.
"""
import logging
import time
from pathlib import Path
from typing import List, Optional, Tuple

import numpy as np

from autodiff.rng import Rng
from autodiff.tensor import Tape, Tensor, no_tape
from data_models.models import (
    DistillMethod,
    EpochRecord,
    FinalEvaluation,
    Role,
    RunReport,
    TrainConfig,
)
from distill.distiller import Distiller
from distill.losses import inject_image_noise, total_loss
from harness.report import emit_report
from nn.checkpoint import CHECKPOINT_SUFFIX, load_checkpoint, load_into, inherit_parameters, save_checkpoint
from nn.losses import pixel_cross_entropy
from nn.network import SmallCNN, forward, init_params
from nn.optim import sgd_step
from synthtask.dataset import generate_dataset, stack_samples
from synthtask.metrics import ConfusionMatrix, miou, pixel_accuracy
from utils.errors import CheckpointError, ConfigError, NumericError

logger = logging.getLogger(__name__)

INIT_STREAM = 0
AUX_STREAM = 1
SHUFFLE_STREAM = 2
NOISE_STREAM = 3

EVAL_BATCH_SIZE = 64
REPORT_FILE = "report.json"


def evaluate(net: SmallCNN, images: np.ndarray, labels: np.ndarray, num_classes: int) -> ConfusionMatrix:
    cm = ConfusionMatrix(num_classes)
    with no_tape():
        for start in range(0, len(images), EVAL_BATCH_SIZE):
            logits, _ = forward(net, Tensor(images[start:start + EVAL_BATCH_SIZE]))
            cm.update(np.argmax(logits.data, axis=1), labels[start:start + EVAL_BATCH_SIZE])
    return cm


def load_teacher(path: str) -> SmallCNN:
    if not Path(path).is_file():
        raise ConfigError(f"Teacher checkpoint not found: {path}")
    ckpt = load_checkpoint(path)
    if not ckpt.architecture:
        raise CheckpointError(f"{path} carries no architecture block; cannot rebuild the teacher")
    teacher = SmallCNN.from_architecture(ckpt.architecture)
    load_into(teacher, ckpt)
    logger.info(f"Loaded frozen teacher {teacher.widths} from {path}")
    return teacher


def _fit(cfg: TrainConfig, teacher: Optional[SmallCNN]) -> Tuple[SmallCNN, RunReport]:
    started = time.perf_counter()
    root = Rng(cfg.seed)
    num_classes = cfg.dataset.num_classes
    train, val = generate_dataset(cfg.dataset)
    x_train, y_train = stack_samples(train)
    x_val, y_val = stack_samples(val)

    net = SmallCNN(cfg.widths, num_classes, in_channels=3, feature_tap=cfg.feature_tap)
    init_params(net, root.spawn(INIT_STREAM))

    method = cfg.distill.method
    alpha = cfg.distill.alpha
    inherited = 0
    if teacher is not None:
        if teacher.num_classes != num_classes:
            raise ConfigError(f"teacher predicts {teacher.num_classes} classes, dataset has {num_classes}")
        if cfg.inherit:
            result = inherit_parameters(net, teacher)
            inherited = result.copied
            if result.copied == 0:
                logger.warning("inherit=true but no parameter matched the teacher by name and shape")
            else:
                logger.info(f"Inherited {result.copied} tensor(s) from the teacher: {result.copied_names}")

    distill_active = teacher is not None and method != DistillMethod.NONE and alpha > 0
    if method != DistillMethod.NONE and alpha == 0:
        logger.warning(f"alpha=0: method '{method.value}' is disabled, training with the task loss only")

    distiller: Optional[Distiller] = None
    if distill_active:
        distiller = Distiller(cfg.distill, net.feature_channels, teacher.feature_channels, rng=root.spawn(AUX_STREAM))
        logger.info(f"Distillation '{method.value}' with {distiller.param_count()} auxiliary parameters")

    shuffle_rng = root.spawn(SHUFFLE_STREAM)
    noise_rng = root.spawn(NOISE_STREAM)
    batch_size = cfg.sgd.batch_size
    n_train = len(x_train)

    records: List[EpochRecord] = []
    for epoch in range(1, cfg.epochs + 1):
        order = shuffle_rng.permutation(n_train)
        task_sum = distill_sum = total_sum = 0.0
        for start in range(0, n_train, batch_size):
            idx = order[start:start + batch_size]
            x = Tensor(x_train[idx])
            y = y_train[idx]

            teacher_logits = teacher_feature = None
            if distill_active:
                with no_tape():
                    teacher_logits, teacher_feature = forward(teacher, x)

            with Tape() as tape:
                x_student = inject_image_noise(x, cfg.distill, noise_rng) if distill_active and distiller.image_noise else x
                logits, feature = forward(net, x_student)
                task = pixel_cross_entropy(logits, y)
                distill_value = 0.0
                if distill_active:
                    distill = distiller.loss(
                        noise_rng,
                        teacher_feature=teacher_feature,
                        student_feature=feature,
                        teacher_logits=teacher_logits,
                        student_logits=logits,
                    )
                    distill_value = distill.item()
                    total = total_loss(task, distill, alpha)
                else:
                    total = task
            if not np.isfinite(total.item()):
                raise NumericError(f"non-finite loss at epoch {epoch}")
            tape.backward(total)
            params = net.parameters() + (distiller.parameters() if distiller else [])
            sgd_step(params, cfg.sgd)

            weight = len(idx)
            task_sum += task.item() * weight
            distill_sum += distill_value * weight
            total_sum += total.item() * weight

        cm = evaluate(net, x_val, y_val, num_classes)
        _, val_miou = miou(cm)
        val_acc = pixel_accuracy(cm)
        record = EpochRecord(
            epoch=epoch,
            task_loss=task_sum / n_train,
            distill_loss=distill_sum / n_train,
            total_loss=total_sum / n_train,
            val_miou=val_miou,
            val_pixel_acc=val_acc,
        )
        records.append(record)
        logger.info(
            f"[{cfg.label}] epoch {epoch}/{cfg.epochs} task={record.task_loss:.4f} "
            f"distill={record.distill_loss:.4f} total={record.total_loss:.4f} "
            f"val_mIoU={val_miou:.4f} val_acc={val_acc:.4f}"
        )

    cm = evaluate(net, x_val, y_val, num_classes)
    per_class, final_miou = miou(cm)
    final = FinalEvaluation(
        per_class_iou=per_class,
        miou=final_miou,
        pixel_acc=pixel_accuracy(cm),
        confusion_matrix=cm.to_list(),
        wall_seconds=(time.perf_counter() - started) if cfg.record_wall_time else 0.0,
        aux_param_count=distiller.param_count() if distiller else 0,
        inherited_params=inherited,
    )
    report = RunReport(run_id=cfg.label, seed=cfg.seed, config=cfg.model_dump(mode="json"), epochs=records, final=final)
    return net, report


def _finish(cfg: TrainConfig, net: SmallCNN, report: RunReport) -> Tuple[Path, RunReport]:
    out_dir = Path(cfg.output_dir)
    ckpt_path = save_checkpoint(net, out_dir / f"{cfg.role.value}{CHECKPOINT_SUFFIX}")
    report.final.checkpoint = str(ckpt_path)
    emit_report(report, "json", out_dir / REPORT_FILE)
    logger.info(f"[{cfg.label}] final mIoU={report.final.miou:.4f} pixel_acc={report.final.pixel_acc:.4f}")
    return ckpt_path, report


def train_teacher(cfg: TrainConfig) -> Tuple[Path, RunReport]:
    """Cross-entropy-only training of the wide network; returns (checkpoint path, report)."""
    if cfg.role != Role.TEACHER:
        raise ConfigError(f"train_teacher needs role 'teacher', got '{cfg.role.value}'")
    net, report = _fit(cfg, teacher=None)
    return _finish(cfg, net, report)


def train_student(cfg: TrainConfig) -> RunReport:
    """Student training under the configured distillation method with a frozen teacher."""
    if cfg.role != Role.STUDENT:
        raise ConfigError(f"train_student needs role 'student', got '{cfg.role.value}'")
    needs_teacher = cfg.distill.method != DistillMethod.NONE or cfg.inherit
    teacher = None
    if needs_teacher:
        if not cfg.teacher_checkpoint:
            raise ConfigError("teacher_checkpoint is required for distillation or inheritance")
        teacher = load_teacher(cfg.teacher_checkpoint)
    net, report = _fit(cfg, teacher)
    _, report = _finish(cfg, net, report)
    return report
