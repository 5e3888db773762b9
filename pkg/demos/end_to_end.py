"""Walk one dataset through the full pipeline, file formats included.

Generates a synthetic classification dataset whose noisier inputs are
misclassified more often, scores every prediction with max-softmax,
calibrates an accept/reject threshold on the validation split at a 5%
false-positive budget, and evaluates on the held-out test split.
"""

import tempfile
from pathlib import Path

from uqsup import (apply, calibrate_threshold, correctness,
                   evaluate_supervised, accuracy_objective,
                   gaussian_cluster_records, partition, quantify_dataset,
                   read_records, write_config, write_records, write_report)

out = Path(tempfile.mkdtemp(prefix="uqsup-demo-"))

d = gaussian_cluster_records(4000, classes=5, noise=1.5, seed=7)
write_records(d, out / "records.jsonl")
d = read_records(out / "records.jsonl")
print(f"dataset: {len(d)} records, metadata {dict(d.metadata)}")

parts = partition(d, "split")
val, test = parts["validation"], parts["test"]

q_val = quantify_dataset(val, "SM")
benign = correctness(q_val, val.records)
config = calibrate_threshold(
    [(q.score, b) for q, b in zip(q_val, benign)], 0.05,
    q_val[0].orientation, quantifier="SM")
write_config(config, out / "supervisor.cfg")
print(f"calibrated: threshold {config.threshold:.4f}, achieved FPR "
      f"{config.achieved_fpr:.4f} on {config.calibration_size} benign "
      "validation scores")

q_test = quantify_dataset(test, "SM")
decisions = apply(config, q_test)
report = evaluate_supervised(test.records, q_test, decisions,
                             accuracy_objective())
write_report(report, out / "report.json")
print(f"plain accuracy       ACC    = {report.unsupervised_objective:.4f}")
print(f"supervised accuracy  ACCbar = {report.supervised_objective:.4f}")
print(f"acceptance rate      delta  = {report.acceptance_rate:.4f}")
print(f"combined             S1     = {report.s_beta[1.0]:.4f}")
print(f"supervisor as detector: AUROC {report.auroc:.4f}, "
      f"TPR {report.tpr:.4f} at FPR {report.fpr:.4f}")
print(f"artifacts in {out}")
