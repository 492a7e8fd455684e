import textwrap

import pytest

from pikieval.dataset import generate_synthetic

TOY_CSV = textwrap.dedent(
    """\
    timestamp,user_id,song_id,liked,personalized,spotify_popularity
    2021-01-01 10:00:00,alice,s1,1,1,80
    2021-01-01 10:01:00,alice,s2,0,0,20
    2021-01-01 10:02:00,bob,s1,2,1,80
    2021-01-01 10:03:00,bob,s3,0,0,30
    2021-01-01 10:04:00,alice,s1,0,1,80
    """
)


@pytest.fixture
def write_csv_text(tmp_path):
    def write(text, name="data.csv"):
        path = tmp_path / name
        path.write_text(text, encoding="utf-8")
        return path

    return write


@pytest.fixture
def toy_csv(write_csv_text):
    return write_csv_text(TOY_CSV)


@pytest.fixture(scope="session")
def planted():
    return generate_synthetic(40, 40, 2, 0.5, 0.0, seed=3)


@pytest.fixture(scope="session")
def synthetic(planted):
    dataset, _ = planted
    return dataset


@pytest.fixture
def no_config_env(monkeypatch):
    monkeypatch.delenv("PIKICONFIG", raising=False)
