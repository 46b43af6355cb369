import csv
import json
from pathlib import Path

import pytest

from circumplex_eval.ingest import config_from_dict
from circumplex_eval.synth import spec_from_dict

ROOT = Path(__file__).resolve().parents[1]
CONFIGS = ROOT / "configs"
GOLDEN = Path(__file__).resolve().parent / "golden"

# Marginal demographic counts of the reference survey, per country of residence.
DEMOGRAPHIC_COUNTS = {
    "SG": {
        "stay": {"0-1": 28, "1-5": 2, "6-10": 2, "10+": 1},
        "zsm": {5: 15, 4: 6, 3: 8, 2: 4},
        "eng": {5: 13, 4: 11, 3: 8, 2: 1},
        "discipline": {"AudioRelated": 7, "NonAudioHASS": 4, "NonAudioEngr": 11,
                       "NonAudioSciences": 6, "Others": 5},
    },
    "MY": {
        "stay": {"0-1": 14, "1-5": 10, "6-10": 4, "10+": 2},
        "zsm": {5: 17, 4: 4, 3: 7, 2: 2},
        "eng": {5: 6, 4: 10, 3: 14, 2: 0},
        "discipline": {"AudioRelated": 3, "NonAudioHASS": 9, "NonAudioEngr": 5,
                       "NonAudioSciences": 2, "Others": 11},
    },
    "Others": {
        "stay": {"0-1": 0, "1-5": 1, "6-10": 1, "10+": 1},
        "zsm": {5: 0, 4: 1, 3: 2, 2: 0},
        "eng": {5: 1, 4: 2, 3: 0, 2: 0},
        "discipline": {"AudioRelated": 1, "NonAudioHASS": 1, "NonAudioEngr": 0,
                       "NonAudioSciences": 0, "Others": 1},
    },
}


def _expand(counts):
    return [key for key, n in counts.items() for _ in range(n)]


def demographic_rows():
    rows = []
    for country, spec in DEMOGRAPHIC_COUNTS.items():
        cols = [_expand(spec[k]) for k in ("stay", "zsm", "eng", "discipline")]
        assert len({len(c) for c in cols}) == 1
        for i, (stay, zsm, eng, disc) in enumerate(zip(*cols), start=1):
            rows.append([f"{country}{i:03d}", country, stay, zsm, eng, disc])
    return rows


@pytest.fixture
def stage1e_respondents_csv(tmp_path):
    path = tmp_path / "respondents.csv"
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["respondent_id", "ccr", "stay_outside_band", "ilr_zsm", "ilr_eng", "discipline"])
        w.writerows(demographic_rows())
    return path


@pytest.fixture(scope="session")
def stage1e_config_dict():
    return json.loads((CONFIGS / "stage1e.json").read_text())


@pytest.fixture(scope="session")
def stage1e_config(stage1e_config_dict):
    return config_from_dict(stage1e_config_dict)


@pytest.fixture(scope="session")
def null_spec_dict():
    return json.loads((CONFIGS / "synth_null.json").read_text())


@pytest.fixture(scope="session")
def null_spec(null_spec_dict):
    return spec_from_dict(null_spec_dict)


def write_text(path: Path, text: str) -> Path:
    path.write_text(text, encoding="utf-8")
    return path


def study_from_spec(spec, out_dir, combined=False, alpha=None):
    from circumplex_eval.ingest import load_responses
    from circumplex_eval.pipeline import run_study
    from circumplex_eval.synth import write_dataset

    paths = write_dataset(spec, out_dir)
    records, people = load_responses(paths["responses"], spec.config, paths["respondents"])
    return run_study(records, people, spec.config, combined=combined, alpha=alpha)


def _result_digest(r):
    return {"method": r.method.value, "statistic": r.statistic, "df": r.df, "p": r.p_value,
            "degenerate": r.degenerate}


def _omnibus_digest(o):
    out = {"omnibus": _result_digest(o.omnibus)}
    if o.posthoc is not None:
        out["posthoc"] = [{"block": p.block, "pair": list(p.pair), "statistic": p.statistic,
                           "p_raw": p.p_raw, "p_adjusted": p.p_adjusted} for p in o.posthoc]
    return out


def study_digest(study):
    """Plain-data view of a StudyResult for golden comparison."""
    out = {"exclusion": study.exclusion.summary(), "alpha": study.alpha, "attributes": {}}
    for a in study.analyses:
        out["attributes"][a.attribute.value] = {
            "means": {cand: {g: {k.value: v for k, v in s.as_dict().items()} for g, s in groups.items()}
                      for cand, groups in a.mean_table.items()},
            "cross_national": {c.value: _omnibus_digest(o) for c, o in a.cross_national.items()},
            "intra_country": {ctry: {c.value: _omnibus_digest(o) for c, o in m.items()}
                              for ctry, m in a.intra_country.items()},
            "combined": None if a.combined is None else {c.value: _omnibus_digest(o) for c, o in a.combined.items()},
        }
    return out


def assert_digest_close(got, want, path="", rel=1e-10):
    if isinstance(want, dict):
        assert isinstance(got, dict) and set(got) == set(want), path
        for k in want:
            assert_digest_close(got[k], want[k], f"{path}/{k}", rel)
    elif isinstance(want, list):
        assert isinstance(got, list) and len(got) == len(want), path
        for i, (g, w) in enumerate(zip(got, want)):
            assert_digest_close(g, w, f"{path}[{i}]", rel)
    elif isinstance(want, float) and not isinstance(want, bool):
        assert got == pytest.approx(want, rel=rel, abs=1e-300), path
    else:
        assert got == want, path


ACCEPTANCE_LINES: dict[int, str] = {}


@pytest.fixture
def criterion(request):
    """Record a PASS/FAIL line for an acceptance criterion; printed in the summary."""
    import contextlib
    import time

    @contextlib.contextmanager
    def run(number, title, note=""):
        start = time.perf_counter()
        try:
            yield
        except BaseException as exc:
            ACCEPTANCE_LINES[number] = f"criterion {number} FAIL  {title}: {type(exc).__name__}: {str(exc).splitlines()[0] if str(exc) else ''}"
            raise
        took = time.perf_counter() - start
        ACCEPTANCE_LINES[number] = f"criterion {number} PASS  {title} ({took:.2f}s){' ' + note if note else ''}"

    return run


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for n in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[n])
