"""CLI contract: subcommands, exit codes, config handling, determinism."""

import math

import pytest

from rdsentropy.audit import run_audit
from rdsentropy.cli import EXIT_CONFIG, EXIT_OK, EXIT_PROPERTY, EXIT_RESOURCE, main
from rdsentropy.systems import ModelSystem, make_doubling_map


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_list_systems(capsys):
    code, out, _ = run_cli(capsys, "list-systems")
    assert code == EXIT_OK
    for name in ("full-shift", "random-expansion", "doubling", "toral-automorphism"):
        assert name in out


def test_estimate_top_full_shift_headline(tmp_path, capsys):
    out_path = tmp_path / "table.csv"
    code, out, _ = run_cli(
        capsys,
        "estimate-top", "--system", "full-shift",
        "--param", "k=2", "--param", "m=1", "--param", "n_max=64",
        "--n", "16", "--n", "32", "--n", "64",
        "--eps", "0.5", "--omega-samples", "1", "--seed", "7",
        "--method", "exact", "--out", str(out_path),
    )
    assert code == EXIT_OK
    value = float(out.split("h_top estimate: ")[1].split(" nats")[0])
    assert value == pytest.approx(math.log(2), abs=1e-9)
    text = out_path.read_text()
    assert text.splitlines()[0] == "system,n,eps,omega_samples,method,mean_rate,std_error"
    assert len(text.splitlines()) == 4


def test_estimate_rejects_bad_config(capsys):
    code, _, err = run_cli(
        capsys,
        "estimate-top", "--system", "doubling", "--n", "2", "--eps", "0.25",
        "--omega-samples", "0",
    )
    assert code == EXIT_CONFIG
    assert "omega_samples" in err


def test_estimate_rejects_eps_guard_violation(capsys):
    code, _, err = run_cli(
        capsys,
        "estimate-top", "--system", "doubling", "--param", "grid_exponent=6",
        "--n", "2", "--eps", "0.05", "--seed", "0",
    )
    assert code == EXIT_CONFIG
    assert "guard" in err


def test_exact_method_resource_cap(capsys):
    code, _, err = run_cli(
        capsys,
        "estimate-top", "--system", "doubling", "--param", "grid_exponent=10",
        "--n", "2", "--eps", "0.25", "--method", "exact",
    )
    assert code == EXIT_RESOURCE
    assert "cap" in err


def test_unknown_system_and_unknown_param(capsys):
    code, _, err = run_cli(capsys, "estimate-top", "--system", "pendulum", "--n", "2",
                           "--eps", "0.25")
    assert code == EXIT_CONFIG
    assert "known systems" in err
    code, _, err = run_cli(
        capsys,
        "estimate-top", "--system", "doubling", "--param", "bogus=1",
        "--n", "2", "--eps", "0.25",
    )
    assert code == EXIT_CONFIG
    assert "bogus" in err


def test_byte_identical_reruns_and_worker_counts(tmp_path, capsys):
    args = [
        "estimate-top", "--system", "random-expansion",
        "--param", "multipliers=2,3", "--param", "grid_exponent=8",
        "--n", "2", "--n", "3", "--n", "4",
        "--eps", "0.125", "--omega-samples", "5", "--seed", "42",
    ]
    paths = [tmp_path / f"t{i}.csv" for i in range(3)]
    extra = ([], [], ["--workers", "2"])
    for path, more in zip(paths, extra):
        code, _, _ = run_cli(capsys, *args, "--out", str(path), *more)
        assert code == EXIT_OK
    blobs = [p.read_bytes() for p in paths]
    assert blobs[0] == blobs[1] == blobs[2]


def test_estimate_fiber_rows_and_ordering(tmp_path, capsys):
    out_path = tmp_path / "fiber.csv"
    code, _, _ = run_cli(
        capsys,
        "estimate-fiber", "--system", "full-shift",
        "--param", "k=2", "--param", "n_max=8",
        "--n", "2", "--n", "4",
        "--partitions", "symbol,trivial",
        "--out", str(out_path),
    )
    assert code == EXIT_OK
    lines = out_path.read_text().splitlines()
    assert len(lines) == 5
    assert lines[1].startswith("full-shift(k=2;m=1;n_max=8)/symbol,2,")
    assert lines[3].startswith("full-shift(k=2;m=1;n_max=8)/trivial,2,")
    trivial_rates = [float(line.split(",")[5]) for line in lines[3:]]
    assert trivial_rates == [0.0, 0.0]


def test_config_file_with_cli_override(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text(
        "# doubling map run\n"
        "system = doubling\n"
        "param.grid_exponent = 8\n"
        "n = 2,3\n"
        "eps = 0.125\n"
        "omega_samples = 2\n"
        "seed = 1\n"
        "method = greedy\n"
    )
    out_a = tmp_path / "a.csv"
    code, _, _ = run_cli(capsys, "estimate-top", "--config", str(cfg), "--out", str(out_a))
    assert code == EXIT_OK
    assert ",2,0.125,2,greedy," in out_a.read_text()
    out_b = tmp_path / "b.csv"
    code, _, _ = run_cli(
        capsys, "estimate-top", "--config", str(cfg), "--seed", "9", "--out", str(out_b)
    )
    assert code == EXIT_OK
    assert out_a.read_text() == out_b.read_text()  # deterministic system: same rates
    code, _, err = run_cli(capsys, "estimate-top", "--config", str(tmp_path / "nope.cfg"))
    assert code != EXIT_OK


def test_config_file_syntax_error(tmp_path, capsys):
    cfg = tmp_path / "broken.cfg"
    cfg.write_text("system doubling\n")
    code, _, err = run_cli(capsys, "estimate-top", "--config", str(cfg))
    assert code == EXIT_CONFIG
    assert "key = value" in err


def test_varprin_full_shift_passes(capsys):
    code, out, _ = run_cli(
        capsys,
        "varprin", "--system", "full-shift", "--param", "n_max=16",
        "--n", "4", "--n", "8", "--n", "16",
        "--eps", "0.5", "--method", "exact", "--seed", "2",
    )
    assert code == EXIT_OK
    assert "PASS" in out
    assert "generating partition [symbol]" in out


def test_audit_subcommand(capsys):
    code, out, _ = run_cli(capsys, "audit", "--seed", "0")
    assert code == EXIT_OK
    assert "all suites passed" in out


def test_audit_repeats_identically(capsys):
    _, out_a, _ = run_cli(capsys, "audit", "--seed", "3")
    _, out_b, _ = run_cli(capsys, "audit", "--seed", "3")
    assert out_a == out_b


class _BrokenCocycleSystem(ModelSystem):
    """Test double: violates the composition law at one multiplier step."""

    def __init__(self):
        base = make_doubling_map(5)
        self.name = "broken-double"
        self.driving_law = base.driving_law
        self.metric = base.metric
        self._base = base
        self.cocycle = _BrokenCocycle(base.modulus)
        self._fiber_cache = None

    @property
    def fiber_size(self):
        return self._base.fiber_size

    def _build_fiber(self):
        return self._base.fiber(None)

    def sample_points(self, omega, count, seed):
        return self._base.sample_points(omega, count, seed)

    @property
    def resolution(self):
        return self._base.resolution

    def canonical_partitions(self):
        return ()


class _BrokenCocycle:
    domain = "monoid"

    def __init__(self, modulus):
        self.modulus = modulus

    def supports(self, g):
        return all(c >= 0 for c in g)

    def apply(self, g, omega, points):
        import numpy as np

        s = g[0]
        return (np.asarray(points) * (2**s) + (1 if s == 2 else 0)) % self.modulus


def test_audit_names_broken_cocycle(capsys):
    import io

    stream = io.StringIO()
    ok = run_audit(seed=0, systems=(_BrokenCocycleSystem(),), stream=stream)
    assert not ok
    assert "FAIL cocycle_audit" in stream.getvalue()
