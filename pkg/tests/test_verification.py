import pytest

from popranking.experiments import GOLDENS_DIR
from popranking.verification import (
    ORACLE_FULL,
    ORACLE_QUICK,
    SUITES,
    closed_form_checks,
    figure_checks,
    oracle_checks,
    proposition_checks,
    verify,
)


def _failures(results):
    return [str(r) for r in results if not (r.passed or r.skipped)]


def test_closed_forms_pass():
    results = closed_form_checks()
    assert len(results) == 8
    assert _failures(results) == []


def test_verify_unknown_suite():
    assert "closed_forms" in SUITES
    with pytest.raises(ValueError, match="Unknown suite"):
        verify("everything")


def test_verify_logs_and_returns(caplog):
    caplog.set_level("INFO")
    results = verify("closed_forms")
    assert results
    assert "Verifying closed_forms" in caplog.text


def test_figure_goldens(tmp_path):
    missing = figure_checks(figures=["figB1"], goldens_dir=tmp_path)
    assert not missing[0].passed
    assert not missing[0].skipped
    assert "--update-goldens" in missing[0].note

    updated = figure_checks(
        update_goldens=True, figures=["figB1"], goldens_dir=tmp_path
    )
    assert updated[0].skipped
    assert (tmp_path / "figB1.csv").exists()

    compared = figure_checks(figures=["figB1"], goldens_dir=tmp_path)
    assert compared[0].passed
    assert not compared[0].skipped


def test_missing_golden_fails_verify(tmp_path):
    results = verify("figures", figures=["figB1"], goldens_dir=tmp_path)
    assert _failures(results)


def test_figure_golden_mismatch(tmp_path):
    figure_checks(update_goldens=True, figures=["figB1"], goldens_dir=tmp_path)
    golden = tmp_path / "figB1.csv"
    lines = golden.read_text().splitlines()
    lines = lines[:-1]
    golden.write_text("\n".join(lines) + "\n")

    compared = figure_checks(figures=["figB1"], goldens_dir=tmp_path)
    assert not compared[0].passed
    assert "rows" in compared[0].note


@pytest.mark.parametrize("figure_id", ["fig1", "figA2", "figA4", "figB1"])
def test_committed_goldens(figure_id):
    assert (GOLDENS_DIR / f"{figure_id}.csv").exists()
    results = figure_checks(figures=[figure_id])
    assert _failures(results) == []


@pytest.mark.slow
@pytest.mark.parametrize(
    "figure_id",
    ["fig2", "fig3", "fig4", "fig5", "figA1", "figA6", "figB2", "figB3"],
)
def test_committed_goldens_slow(figure_id):
    results = figure_checks(figures=[figure_id])
    assert _failures(results) == []


def test_oracle_agreement_small():
    results = oracle_checks(
        points=3, mc_points=0, reps=2, horizon=200, ordinal=False
    )
    assert results[0].passed, results[0].note
    assert results[1].name == "alpha=0 matches a never-updated ranking"
    assert results[1].passed
    assert results[1].observed == 0.0
    # the single incorrect website check needs a long horizon to converge
    assert len(results) == 3


def test_oracle_sizes():
    assert ORACLE_FULL["points"] == 500
    assert ORACLE_FULL["reps"] == 500
    assert ORACLE_QUICK["points"] < ORACLE_FULL["points"]


@pytest.mark.slow
def test_oracle_agreement_quick():
    results = oracle_checks(quick=True, ordinal=False)
    assert results[0].name.endswith("(50 points)")
    assert _failures(results) == []


@pytest.mark.slow
def test_every_proposition_passes(propositions):
    names = [result.name for result in propositions]
    assert len(names) == len(set(names))
    assert _failures(propositions) == []


@pytest.mark.slow
def test_gamma_sweep_reports_observed(propositions):
    (sweep,) = [
        r
        for r in propositions
        if r.name.startswith("efficiency non-increasing")
    ]
    assert len(sweep.observed) == 11
    assert sweep.observed[0] > sweep.observed[-1]


@pytest.fixture(scope="module")
def propositions():
    return proposition_checks()
