import json

import numpy as np
import pytest

from uqexport import (ExportError, ExportSpec, export_ensemble, export_point,
                      export_sampled, load_model,
                      write_classification_records)
from uqexport.cli import main


def read_lines(path):
    with open(path, encoding="utf-8") as fh:
        return [json.loads(line) for line in fh if line.strip()]


class TestExportSpec:
    def test_defaults(self, tmp_path):
        spec = ExportSpec(out=tmp_path / "r.jsonl")
        assert spec.samples == 1
        assert spec.split == "test"
        assert spec.source == "nominal"
        assert spec.batch_size == 32

    def test_rejects_bad_samples(self, tmp_path):
        with pytest.raises(ExportError, match="samples"):
            ExportSpec(out=tmp_path / "r", samples=0)

    def test_rejects_bad_split(self, tmp_path):
        with pytest.raises(ExportError, match="split"):
            ExportSpec(out=tmp_path / "r", split="holdout")

    def test_metadata_stringified(self, tmp_path):
        spec = ExportSpec(out=tmp_path / "r", metadata={"epoch": 3})
        assert spec.metadata["epoch"] == "3"


class TestPoint:
    def test_writes_t1_file(self, model_dir, xy, tmp_path):
        x, y = xy
        out = tmp_path / "point.jsonl"
        export_point(model_dir / "plain.keras", x, y, ExportSpec(out=out))
        header, *records = read_lines(out)
        assert header == {"version": 1, "task": "classification",
                          "num_classes": 3, "samples_per_record": 1}
        assert len(records) == len(x)
        assert records[0]["split"] == "test"
        assert all(len(r["outputs"]) == 1 for r in records)
        assert all(0 <= r["label"] < 3 for r in records)

    def test_labels_optional(self, model_dir, xy, tmp_path):
        x, _ = xy
        out = tmp_path / "nolabel.jsonl"
        export_point(model_dir / "plain.keras", x, None, ExportSpec(out=out))
        _, *records = read_lines(out)
        assert all("label" not in r for r in records)

    def test_logits_model_aborts(self, model_dir, xy, tmp_path):
        x, y = xy
        with pytest.raises(ExportError, match="softmax"):
            export_point(model_dir / "logits.keras", x, y,
                         ExportSpec(out=tmp_path / "r.jsonl"))

    def test_batch_size_does_not_change_output(self, model_dir, xy,
                                               tmp_path):
        x, y = xy
        a, b = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
        export_point(model_dir / "plain.keras", x, y,
                     ExportSpec(out=a, batch_size=7))
        export_point(model_dir / "plain.keras", x, y,
                     ExportSpec(out=b, batch_size=32))
        assert a.read_bytes() == b.read_bytes()

    def test_bad_labels_abort(self, model_dir, xy, tmp_path):
        x, _ = xy
        bad = np.full(len(x), 9)
        with pytest.raises(ExportError, match="0..2"):
            export_point(model_dir / "plain.keras", x, bad,
                         ExportSpec(out=tmp_path / "r.jsonl"))


class TestSampled:
    def test_t_samples_per_record(self, model_dir, xy, tmp_path):
        x, y = xy
        out = tmp_path / "s.jsonl"
        export_sampled(model_dir / "dropout.keras", x, y,
                       ExportSpec(out=out, samples=5, seed=3))
        header, *records = read_lines(out)
        assert header["samples_per_record"] == 5
        first = records[0]["outputs"]
        assert len(first) == 5
        # Dropout must actually perturb the passes.
        assert any(first[0] != row for row in first[1:])

    def test_seeded_runs_identical(self, model_dir, xy, tmp_path):
        x, y = xy
        a, b = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
        for out in (a, b):
            export_sampled(model_dir / "dropout.keras", x, y,
                           ExportSpec(out=out, samples=4, seed=9))
        assert a.read_bytes() == b.read_bytes()

    def test_different_seeds_differ(self, model_dir, xy, tmp_path):
        x, y = xy
        a, b = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
        export_sampled(model_dir / "dropout.keras", x, y,
                       ExportSpec(out=a, samples=4, seed=9))
        export_sampled(model_dir / "dropout.keras", x, y,
                       ExportSpec(out=b, samples=4, seed=10))
        assert a.read_bytes() != b.read_bytes()

    def test_requires_dropout(self, model_dir, xy, tmp_path):
        x, y = xy
        with pytest.raises(ExportError, match="dropout"):
            export_sampled(model_dir / "plain.keras", x, y,
                           ExportSpec(out=tmp_path / "r.jsonl", samples=5))

    def test_one_sample_matches_point(self, model_dir, xy, tmp_path):
        x, y = xy
        a, b = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
        export_sampled(model_dir / "dropout.keras", x, y,
                       ExportSpec(out=a, samples=1))
        export_point(model_dir / "dropout.keras", x, y, ExportSpec(out=b))
        assert a.read_bytes() == b.read_bytes()


class TestEnsemble:
    def members(self, model_dir, k=3):
        return [model_dir / f"member{i}.keras" for i in range(k)]

    def test_one_sample_per_member(self, model_dir, xy, tmp_path):
        x, y = xy
        out = tmp_path / "e.jsonl"
        export_ensemble(self.members(model_dir), x, y, ExportSpec(out=out))
        header, *records = read_lines(out)
        assert header["samples_per_record"] == 3
        assert len(records) == len(x)

    def test_single_member_aborts(self, model_dir, xy, tmp_path):
        x, y = xy
        with pytest.raises(ExportError, match="at least 2"):
            export_ensemble(self.members(model_dir, 1), x, y,
                            ExportSpec(out=tmp_path / "r.jsonl"))

    def test_heterogeneous_arity_aborts(self, model_dir, xy, tmp_path):
        x, y = xy
        members = self.members(model_dir, 2) + [
            model_dir / "member_4class.keras"]
        with pytest.raises(ExportError, match="classes"):
            export_ensemble(members, x, y,
                            ExportSpec(out=tmp_path / "r.jsonl"))

    def test_member_order_permutes_samples_only(self, model_dir, xy,
                                                tmp_path):
        x, y = xy
        a, b = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
        members = self.members(model_dir)
        export_ensemble(members, x, y, ExportSpec(out=a))
        export_ensemble(members[::-1], x, y, ExportSpec(out=b))
        recs_a, recs_b = read_lines(a)[1:], read_lines(b)[1:]
        for ra, rb in zip(recs_a, recs_b):
            assert ra["outputs"] == rb["outputs"][::-1]


class TestWriter:
    def test_rejects_duplicate_ids(self, tmp_path):
        outs = np.full((2, 1, 2), 0.5)
        with pytest.raises(ExportError, match="unique"):
            write_classification_records(tmp_path / "r", ["a", "a"], outs,
                                         None, "test", "nominal")

    def test_rejects_single_class(self, tmp_path):
        with pytest.raises(ExportError, match="2 classes"):
            write_classification_records(tmp_path / "r", ["a"],
                                         np.ones((1, 1, 1)), None, "test",
                                         "nominal")

    def test_metadata_keys_sorted(self, tmp_path):
        out = tmp_path / "r.jsonl"
        write_classification_records(out, ["a"], np.full((1, 1, 2), 0.5),
                                     None, "test", "nominal",
                                     {"zeta": "1", "alpha": "2"})
        header = read_lines(out)[0]
        assert list(header)[-2:] == ["meta.alpha", "meta.zeta"]


class TestCli:
    def test_sampled_roundtrip(self, model_dir, xy, tmp_path, capsys):
        x, y = xy
        npz = tmp_path / "data.npz"
        np.savez(npz, inputs=x, labels=y)
        out = tmp_path / "cli.jsonl"
        code = main(["sampled", str(model_dir / "dropout.keras"),
                     "--inputs", str(npz), "--samples", "3",
                     "--out", str(out), "--split", "validation",
                     "--meta", "run=1"])
        assert code == 0
        assert f"wrote {len(x)} records" in capsys.readouterr().out
        header, *records = read_lines(out)
        assert header["meta.run"] == "1"
        assert records[0]["split"] == "validation"

    def test_missing_inputs_is_usage_error(self, model_dir, tmp_path,
                                           capsys):
        code = main(["point", str(model_dir / "plain.keras"),
                     "--inputs", str(tmp_path / "nope.npz"),
                     "--out", str(tmp_path / "r.jsonl")])
        assert code == 2
        assert "error:" in capsys.readouterr().err

    def test_logits_abort_is_usage_error(self, model_dir, xy, tmp_path,
                                         capsys):
        x, _ = xy
        npy = tmp_path / "x.npy"
        np.save(npy, x)
        code = main(["point", str(model_dir / "logits.keras"),
                     "--inputs", str(npy),
                     "--out", str(tmp_path / "r.jsonl")])
        assert code == 2
        assert "softmax" in capsys.readouterr().err

    def test_directory_inputs(self, model_dir, xy, tmp_path):
        x, y = xy
        d = tmp_path / "arrays"
        d.mkdir()
        np.save(d / "inputs.npy", x)
        np.save(d / "labels.npy", y)
        out = tmp_path / "r.jsonl"
        assert main(["point", str(model_dir / "plain.keras"),
                     "--inputs", str(d), "--out", str(out)]) == 0
        _, *records = read_lines(out)
        assert all("label" in r for r in records)
