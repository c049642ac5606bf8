"""
Tests for run parameters and configuration files.
"""

from pathlib import Path

import pytest

from ppct_mhd.config import format_config, load_config, parse_config
from ppct_mhd.core import GasModel
from ppct_mhd.errors import ConfigurationError
from ppct_mhd.parameters import RunConfig
from ppct_mhd.problems import JET_VARIANTS, PROBLEMS

OT_8 = "problem = orszag-tang\nnx = 8\nny = 8\n"
SHIPPED = sorted((Path(__file__).parent.parent / "configs").glob("*.cfg"))


class TestRunConfig:
    """Tests for RunConfig validation."""

    def test_defaults(self):
        """cfl defaults to 2/q."""
        config = RunConfig(t_end=1.0)
        assert config.q == 3.0
        assert config.cfl == pytest.approx(2.0 / 3.0)
        assert config.stage_cfl_limit == pytest.approx(1.0 / 3.0)
        assert config.output_times == (1.0,)

    def test_q_must_exceed_two(self):
        """q = 2 is rejected."""
        with pytest.raises(ConfigurationError, match="q must be"):
            RunConfig(t_end=1.0, q=2.0)

    def test_cfl_above_bound(self):
        """cfl > 2/q is rejected."""
        with pytest.raises(ConfigurationError, match="cfl must be"):
            RunConfig(t_end=1.0, q=3.0, cfl=0.9)

    def test_cfl_at_bound_accepted(self):
        """cfl = 2/q is allowed."""
        assert RunConfig(t_end=1.0, q=4.0, cfl=0.5).cfl == 0.5

    def test_multiple_errors_collected(self):
        """All problems are reported at once."""
        with pytest.raises(ConfigurationError) as info:
            RunConfig(t_end=-1.0, safety=2.0, eps_tol=0.0)
        message = str(info.value)
        assert "safety" in message and "eps_tol" in message and "t_end" in message

    def test_snapshot_outside_range(self):
        """Snapshot times must lie in [0, t_end]."""
        with pytest.raises(ConfigurationError):
            RunConfig(t_end=1.0, snapshot_times=(2.0,))

    def test_output_times_sorted_with_end(self):
        """Output times are sorted and include t_end once."""
        config = RunConfig(t_end=1.0, snapshot_times=(0.5, 0.25, 1.0))
        assert config.output_times == (0.25, 0.5, 1.0)

    def test_soft_warnings(self):
        """A loose tolerance and a disabled limiter warn."""
        with pytest.warns(UserWarning):
            config = RunConfig(t_end=1.0, eps_tol=1e-4, pp_limiter=False)
        assert len(config.validate()) == 2


class TestParseConfig:
    """Tests for the configuration grammar."""

    def test_problem_defaults(self):
        """Omitted keys come from the problem and RunConfig."""
        plan = parse_config(OT_8)
        assert plan.problem.name == "orszag-tang"
        assert plan.resolution == (8, 8)
        assert plan.config.t_end == 4.0
        assert plan.config.snapshot_times == (2.0, 3.0)
        assert plan.config.q == 3.0
        assert plan.config.eps_tol == 1e-10
        assert plan.out_dir == Path("output")

    def test_comments_and_blank_lines(self):
        """Comments and blank lines are ignored."""
        plan = parse_config("# a run\n\nproblem = vortex  # smooth\nnx = 16\nny = 16\n")
        assert plan.resolution == (16, 16)

    def test_overrides(self):
        """Scheme keys reach RunConfig."""
        text = OT_8 + "q = 4\ncfl = 0.25\neps_tol = 1e-12\nmax_ct_iter = 50\nt_end = 0.5\nsnapshots = 0.1, 0.2\npp_limiter = on\n"
        config = parse_config(text).config
        assert (config.q, config.cfl, config.eps_tol, config.max_ct_iter) == (4.0, 0.25, 1e-12, 50)
        assert config.snapshot_times == (0.1, 0.2)
        assert config.pp_limiter is True

    def test_q_two_rejected(self):
        """q = 2 is a configuration error."""
        with pytest.raises(ConfigurationError, match="q must be"):
            parse_config(OT_8 + "q = 2\n")

    def test_cfl_too_large(self):
        """cfl above 2/q is a configuration error."""
        with pytest.raises(ConfigurationError, match="cfl must be"):
            parse_config(OT_8 + "cfl = 0.9\n")

    def test_unknown_key(self):
        """Unknown keys name their line."""
        with pytest.raises(ConfigurationError, match="Line 4: unknown key 'courant'"):
            parse_config(OT_8 + "courant = 0.5\n")

    def test_bad_number(self):
        """Non-numeric values are rejected."""
        with pytest.raises(ConfigurationError, match="must be a number"):
            parse_config(OT_8 + "t_end = soon\n")

    def test_bad_boolean(self):
        """Booleans accept only the usual spellings."""
        with pytest.raises(ConfigurationError, match="true or false"):
            parse_config(OT_8 + "pp_limiter = maybe\n")

    def test_missing_equals(self):
        """Lines without '=' are rejected."""
        with pytest.raises(ConfigurationError, match="expected 'key = value'"):
            parse_config(OT_8 + "q 3\n")

    def test_missing_problem(self):
        """problem is required."""
        with pytest.raises(ConfigurationError, match="Missing required key 'problem'"):
            parse_config("nx = 8\n")

    def test_duplicate_key(self):
        """Keys may appear once."""
        with pytest.raises(ConfigurationError, match="duplicate key 'nx'"):
            parse_config(OT_8 + "nx = 16\n")

    def test_nz_for_2d_problem(self):
        """nz is only valid for 3D problems."""
        with pytest.raises(ConfigurationError, match="'nz' given"):
            parse_config(OT_8 + "nz = 8\n")

    def test_3d_resolution(self):
        """3D problems take nx, ny and nz."""
        plan = parse_config("problem = smooth-3d\nnx = 4\nny = 6\nnz = 8\n")
        assert plan.resolution == (4, 6, 8)

    def test_gamma_override(self):
        """gamma replaces the problem's equation of state."""
        plan = parse_config("problem = blast\nnx = 8\nny = 8\ngamma = 1.6\n")
        assert plan.config.gas == GasModel(1.6)
        assert plan.problem.gas == GasModel(1.6)

    def test_problem_parameter(self):
        """Problem keywords reach the constructor."""
        plan = parse_config("problem = vortex\nnx = 16\nny = 16\nmu = 2.5\n")
        assert plan.problem.parameters["mu"] == 2.5

    def test_problem_parameter_not_taken(self):
        """Keywords a problem does not take are rejected."""
        with pytest.raises(ConfigurationError, match="does not take"):
            parse_config(OT_8 + "mu = 2\n")

    def test_default_snapshots_clipped_to_t_end(self):
        """Problem snapshot times beyond t_end are dropped."""
        plan = parse_config("problem = jet\nnx = 8\nny = 24\nt_end = 0.0012\n")
        assert plan.config.snapshot_times == (0.001,)


class TestFormatConfig:
    """Tests for rendering a plan back to text."""

    def test_round_trip(self):
        """Formatting and parsing reproduces the plan exactly."""
        text = "problem = jet\nnx = 8\nny = 24\nmach = 2000\nfull_domain = yes\nq = 2.01\nsafety = 0.9\nout_dir = runs/jet\n"
        plan = parse_config(text)
        again = parse_config(format_config(plan))
        assert again.config == plan.config
        assert again.problem.geometry == plan.problem.geometry
        assert again.problem.parameters == plan.problem.parameters
        assert again.out_dir == plan.out_dir

    def test_comment_line(self):
        """An optional comment heads the text."""
        text = format_config(parse_config(OT_8), comment="manifest")
        assert text.startswith("# manifest\nproblem = orszag-tang\n")


class TestLoadConfig:
    """Tests for reading configuration files."""

    def test_load(self, tmp_path):
        """Files are read and parsed."""
        path = tmp_path / "ot.cfg"
        path.write_text(OT_8)
        assert load_config(path).resolution == (8, 8)

    def test_missing_file(self, tmp_path):
        """Unreadable files are configuration errors."""
        with pytest.raises(ConfigurationError, match="Cannot read config file"):
            load_config(tmp_path / "absent.cfg")


class TestShippedConfigs:
    """The example configurations under configs/ stay loadable."""

    @pytest.mark.parametrize("path", SHIPPED, ids=lambda p: p.stem)
    def test_loads(self, path):
        """Each file parses into a plan that writes under output/."""
        plan = load_config(path)
        assert plan.out_dir.parts[0] == "output"

    def test_every_problem_has_a_config(self):
        """Each registered problem ships at least one configuration."""
        assert {load_config(path).problem.name for path in SHIPPED} == set(PROBLEMS)

    def test_full_scale_jets(self):
        """500 x 1500 jets cover every B0 at Mach 800 and the faster jets at the strongest field."""
        jets = set()
        for path in SHIPPED:
            plan = load_config(path)
            if plan.problem.name == "jet" and plan.resolution == (500, 1500):
                jets.add((plan.problem.parameters["mach"], round(plan.problem.parameters["b0"], 9)))
        strongest = round(JET_VARIANTS["beta-1e-4"], 9)
        expected = {(800.0, round(b0, 9)) for b0 in JET_VARIANTS.values()} | {(2000.0, strongest), (10000.0, strongest)}
        assert jets == expected

    def test_full_scale_orszag_tang(self):
        """The full-size Orszag-Tang run reaches t = 4."""
        plan = load_config(Path(__file__).parent.parent / "configs" / "orszag_tang_400.cfg")
        assert plan.resolution == (400, 400)
        assert plan.config.output_times == (2.0, 3.0, 4.0)
