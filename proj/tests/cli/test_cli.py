# Copyright 2026 The flowrnn Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#      http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""End-to-end checks of the flowrnn binary: exit codes, report schemas, CSV shape."""

import csv
import json
import os
import pathlib
import subprocess
import sys
import tempfile
import unittest

import jsonschema

BINARY = pathlib.Path(os.environ["FLOWRNN_BIN"])
SCHEMAS = pathlib.Path(os.environ["FLOWRNN_SCHEMAS"])

PIPELINE_INI = """\
[run]
seed = 5
out = out

[data]
dir = out/data
height = 8
width = 8
length = 8
train_count = 12
val_count = 4
test_count = 6
test_flows = vt2

[model]
flow_set = vt2
hidden = 2
decoder_hidden = 2

[train]
steps = 3
batch = 4
lr = 1e-3
warmup = 4
horizon = 4
eval_every = 2
log_every = 0

[eval]
warmup = 4
horizon = 4

[rollout]
warmup = 4
horizon = 4
"""


def run(args, cwd, env=None):
    full_env = dict(os.environ)
    full_env.update(env or {})
    return subprocess.run([str(BINARY), *args], cwd=cwd, env=full_env,
                          capture_output=True, text=True, check=False)


def validate(path, schema_name):
    schema = json.loads((SCHEMAS / f"{schema_name}.schema.json").read_text())
    report = json.loads(pathlib.Path(path).read_text())
    jsonschema.validate(report, schema)
    return report


def read_csv(path):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    widths = {len(r) for r in rows}
    assert len(widths) == 1, f"{path}: ragged rows {widths}"
    return rows


class PipelineTest(unittest.TestCase):
    @classmethod
    def setUpClass(cls):
        cls.tmp = tempfile.TemporaryDirectory()
        cls.cwd = pathlib.Path(cls.tmp.name)
        (cls.cwd / "p.ini").write_text(PIPELINE_INI)
        cls.results = {}
        for cmd in ("gen-data", "train", "eval", "rollout"):
            cls.results[cmd] = run([cmd, "-c", "p.ini"], cls.cwd)

    @classmethod
    def tearDownClass(cls):
        cls.tmp.cleanup()

    def test_all_commands_succeed(self):
        for cmd, res in self.results.items():
            self.assertEqual(res.returncode, 0, f"{cmd}: {res.stderr}")

    def test_reports_match_schemas(self):
        out = self.cwd / "out"
        validate(out / "dataset_report.json", "dataset_report")
        validate(out / "train_report.json", "train_report")
        report = validate(out / "eval_report.json", "eval_report")
        self.assertEqual(len(report["per_step_mse"]), 4)
        validate(out / "rollout_report.json", "rollout_report")

    def test_csv_outputs_are_rectangular(self):
        out = self.cwd / "out"
        for name in ("dataset_index.csv", "loss_curve.csv", "final_metrics.csv",
                     "eval_metrics.csv", "eval_per_velocity.csv", "rollout.csv"):
            rows = read_csv(out / name)
            self.assertGreater(len(rows), 1, name)
        header = read_csv(out / "eval_metrics.csv")[0]
        self.assertEqual(header[:3], ["step", "split", "total_mse"])
        self.assertEqual(len(header), 3 + 25)

    def test_csv_uses_crlf(self):
        raw = (self.cwd / "out" / "loss_curve.csv").read_bytes()
        self.assertTrue(raw.endswith(b"\r\n"))
        self.assertEqual(raw.count(b"\n"), raw.count(b"\r\n"))

    def test_every_command_echoes_its_config(self):
        for cmd in self.results:
            echo = (self.cwd / "out" / f"resolved_{cmd}.ini").read_text()
            self.assertIn("[run]", echo)
            self.assertIn("seed = 5", echo)

    def test_echo_is_a_valid_config(self):
        res = run(["eval", "-c", "out/resolved_eval.ini", "--out", "again",
                   "--set", "eval.checkpoint=out/model.fmdl"], self.cwd)
        self.assertEqual(res.returncode, 0, res.stderr)
        first = (self.cwd / "out" / "eval_metrics.csv").read_bytes()
        second = (self.cwd / "again" / "eval_metrics.csv").read_bytes()
        self.assertEqual(first, second)

    def test_missing_manifest_exits_1(self):
        res = run(["eval", "-c", "p.ini", "--set", "data.dir=nowhere", "--out", "x"], self.cwd)
        self.assertEqual(res.returncode, 1)
        self.assertIn("manifest", res.stderr)


class CheckTest(unittest.TestCase):
    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.cwd = pathlib.Path(self.tmp.name)

    def tearDown(self):
        self.tmp.cleanup()

    def check(self, *overrides, flags=()):
        args = ["check-equivariance", "--out", "c", "--set", "check.trials=5", *flags]
        for o in overrides:
            args += ["--set", o]
        res = run(args, self.cwd)
        report = validate(self.cwd / "c" / "check_report.json", "check_report") \
            if res.returncode in (0, 2) else None
        return res, report

    def test_fernn_passes(self):
        res, report = self.check()
        self.assertEqual(res.returncode, 0, res.stderr)
        self.assertLessEqual(report["max_residual"]["flow"], 1e-12)

    def test_grnn_fails_with_exit_2(self):
        res, report = self.check("check.family=grnn")
        self.assertEqual(res.returncode, 2)
        self.assertGreaterEqual(report["max_residual"]["flow"], 0.1)

    def test_expected_failure_flips_exit_code(self):
        res, _ = self.check("check.family=grnn", flags=("--expect-failure",))
        self.assertEqual(res.returncode, 0)
        res, _ = self.check(flags=("--expect-failure",))
        self.assertEqual(res.returncode, 2)

    def test_constant_kernels_are_invariant(self):
        res, report = self.check("check.family=grnn", "check.kernels=constant", "check.height=5",
                                 "check.width=5", "check.sigma=tanh")
        self.assertEqual(res.returncode, 0, res.stderr)
        self.assertEqual(report["mapping"], "invariance")

    def test_unknown_key_exits_1(self):
        res, _ = self.check("check.nonsense=1")
        self.assertEqual(res.returncode, 1)
        self.assertIn("unknown key", res.stderr)

    def test_env_override_applies(self):
        res = run(["check-equivariance", "--out", "c"], self.cwd,
                  env={"FLOWRNN_CHECK_TRIALS": "3", "FLOWRNN_CHECK_FAMILY": "grnn"})
        self.assertEqual(res.returncode, 2)
        report = json.loads((self.cwd / "c" / "check_report.json").read_text())
        self.assertEqual(report["trials"], 3)
        echo = (self.cwd / "c" / "resolved_check-equivariance.ini").read_text()
        self.assertIn("[env]", echo)

    def test_flag_beats_override(self):
        res = run(["check-equivariance", "--out", "c", "--set", "run.seed=1", "--seed", "9",
                   "--set", "check.trials=1"], self.cwd)
        self.assertEqual(res.returncode, 0)
        echo = (self.cwd / "c" / "resolved_check-equivariance.ini").read_text()
        self.assertIn("seed = 9", echo)

    def test_counterexample_report(self):
        res = run(["counterexample", "--out", "ce"], self.cwd)
        self.assertEqual(res.returncode, 0, res.stderr)
        report = validate(self.cwd / "ce" / "counterexample_report.json", "counterexample_report")
        self.assertEqual(report["grnn_flow_residual"], [0, 1, 2, 3, 4, 5])
        self.assertTrue(report["grnn_residual_increasing"])
        self.assertEqual(max(report["fernn_flow_residual"]), 0)
        rows = read_csv(self.cwd / "ce" / "counterexample_residuals.csv")
        self.assertEqual(rows[0], ["t", "grnn_static", "grnn_flow", "fernn_flow"])


if __name__ == "__main__":
    unittest.main(verbosity=2, argv=[sys.argv[0]])
