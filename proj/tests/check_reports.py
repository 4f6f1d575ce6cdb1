#!/usr/bin/env python3
"""End-to-end checks of the hodlrkit executable: every report validates
against the shipped schema, exit codes, and reproducibility of outputs."""

import json
import os
import subprocess
import sys
import tempfile
import unittest
from pathlib import Path

import jsonschema

BINARY = None
SCHEMA = None


def run(*args, env=None, check=True):
    full_env = dict(os.environ)
    full_env.pop("HODLRKIT_LOG", None)
    if env:
        full_env.update(env)
    proc = subprocess.run([BINARY, *map(str, args)], capture_output=True, text=True, env=full_env, timeout=300)
    if check and proc.returncode != 0:
        raise AssertionError(f"{args} exited {proc.returncode}: {proc.stderr}")
    return proc


class Reports(unittest.TestCase):
    @classmethod
    def setUpClass(cls):
        cls.tmp = tempfile.TemporaryDirectory(prefix="hodlrkit_reports_")
        cls.dir = Path(cls.tmp.name)
        cls.validator = jsonschema.Draft202012Validator(json.loads(Path(SCHEMA).read_text()))
        cls.grid = cls.dir / "g"
        cls.gen_report = cls.report(
            "gen", "--grid", "96x9", "--sep-axis", "y", "--sep-plane", "4", "--prefix", cls.grid)

    @classmethod
    def tearDownClass(cls):
        cls.tmp.cleanup()

    @classmethod
    def report(cls, *args, env=None):
        proc = run(*args, env=env)
        return json.loads(proc.stdout)

    def validate(self, rep):
        errors = sorted(self.validator.iter_errors(rep), key=lambda e: list(e.path))
        self.assertFalse(errors, "\n".join(f"{list(e.path)}: {e.message}" for e in errors))

    def front_args(self, leaf_size=16):
        g = str(self.grid)
        return ["--front", g + ".front.mtx", "--graph", g + ".op.mtx", "--ordering", g + ".order.txt",
                "--rhs", g + ".rhs.mtx", "--leaf-size", str(leaf_size)]

    def test_gen_reports_validate(self):
        self.validate(self.gen_report)
        self.assertEqual(self.gen_report["result"]["n"], 96)
        kernel = self.report("gen", "--kernel", "exp-decay", "--n", "64", "--shift", "1",
                             "--prefix", self.dir / "k")
        self.validate(kernel)
        vec = self.report("gen", "--grid", "5x5x5", "--stencil", "vector-laplacian", "--sep-axis", "z",
                          "--prefix", self.dir / "v")
        self.validate(vec)
        self.assertEqual(vec["result"]["n"], 75)

    def test_gen_is_byte_identical(self):
        for prefix in ("r1", "r2"):
            run("gen", "--grid", "20x20", "--sep-axis", "x", "--seed", "5", "--prefix", self.dir / prefix)
        for suffix in (".front.mtx", ".graph.mtx", ".op.mtx", ".order.txt", ".rhs.mtx"):
            a = (self.dir / ("r1" + suffix)).read_bytes()
            b = (self.dir / ("r2" + suffix)).read_bytes()
            self.assertEqual(a, b, suffix)

    def test_every_command_validates(self):
        args = self.front_args()
        for cmd, extra in [
            ("factor", ["--scheme", "bdlr", "--tol", "1e-3", "--depth", "3"]),
            ("factor", ["--scheme", "aca", "--threads", "4"]),
            ("solve", ["--scheme", "svd", "--tol", "1e-12", "--solution", self.dir / "x.mtx"]),
            ("gmres", ["--scheme", "bdlr", "--tol", "0.1", "--depth", "1", "--baseline"]),
            ("study-rank", ["--block", "1,1,lower", "--tols", "0.1,0.001", "--depths", "1,3"]),
            ("study-pivots", ["--block", "0,0"]),
        ]:
            with self.subTest(cmd=cmd, extra=extra):
                rep = self.report(cmd, *args, *extra)
                self.validate(rep)
                self.assertEqual(rep["command"], cmd)
        self.assertTrue((self.dir / "x.mtx").exists())

    def test_out_flag_writes_file_and_nothing_to_stdout(self):
        out = self.dir / "factor.json"
        proc = run("factor", *self.front_args(), "--out", out)
        self.assertEqual(proc.stdout, "")
        self.validate(json.loads(out.read_text()))

    def test_reports_match_modulo_timings(self):
        args = [*self.front_args(), "--scheme", "bdlr", "--tol", "1e-3", "--depth", "3", "--baseline"]
        a = self.report("gmres", *args)
        b = self.report("gmres", *args)
        a.pop("timings")
        b.pop("timings")
        self.assertEqual(a, b)

    def test_non_convergence_exits_two_with_valid_report(self):
        out = self.dir / "nc.json"
        proc = run("gmres", *self.front_args(leaf_size=4), "--scheme", "aca", "--tol", "0.9",
                   "--gmres-maxit", "1", "--out", out, check=False)
        self.assertEqual(proc.returncode, 2, proc.stderr)
        rep = json.loads(out.read_text())
        self.validate(rep)
        self.assertFalse(rep["result"]["hodlr"]["converged"])

    def test_errors_exit_one(self):
        proc = run("factor", "--front", self.dir / "missing.mtx", check=False)
        self.assertEqual(proc.returncode, 1)
        self.assertTrue(proc.stderr.startswith("error: IOError"), proc.stderr)
        self.assertEqual(proc.stdout, "")
        proc = run("study-rank", *self.front_args(), "--block", "9,0", check=False)
        self.assertEqual(proc.returncode, 1)
        self.assertIn("BlockOutOfRange", proc.stderr)
        proc = run("factor", *self.front_args(), "--scheme", "qr", check=False)
        self.assertEqual(proc.returncode, 1)
        proc = run("frobnicate", check=False)
        self.assertEqual(proc.returncode, 1)

    def test_log_level_goes_to_stderr(self):
        quiet = run("factor", *self.front_args())
        self.assertEqual(quiet.stderr, "")
        loud = run("factor", *self.front_args(), env={"HODLRKIT_LOG": "debug"})
        self.assertIn("[debug]", loud.stderr)
        self.assertIn("[info]", loud.stderr)
        json.loads(loud.stdout)
        info = run("factor", *self.front_args(), env={"HODLRKIT_LOG": "info"})
        self.assertIn("[info]", info.stderr)
        self.assertNotIn("[debug]", info.stderr)


if __name__ == "__main__":
    BINARY, SCHEMA = sys.argv[1], sys.argv[2]
    unittest.main(argv=[sys.argv[0], "-v"])
