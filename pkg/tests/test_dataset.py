import numpy as np
import pandas as pd
import pytest

from pikieval.dataset import (
    LESSER_KNOWN,
    WELL_KNOWN,
    binarize,
    binarize_labels,
    build_dataset,
    dataset_summary,
    generate_synthetic,
    load_csv,
    segment_by_popularity,
    write_csv,
)
from pikieval.errors import (
    EmptyDatasetError,
    LabelError,
    RowParseError,
    SchemaError,
)

HEADER = "timestamp,user_id,song_id,liked,personalized,spotify_popularity\n"


def test_binarize():
    assert binarize(0) == 0
    assert binarize(1) == 1
    assert binarize(2) == 1
    with pytest.raises(LabelError):
        binarize(3)
    with pytest.raises(LabelError):
        binarize(-1)
    with pytest.raises(LabelError):
        binarize(True)


def test_binarize_labels():
    assert binarize_labels([0, 2, 1, 0]).tolist() == [0, 1, 1, 0]
    with pytest.raises(LabelError):
        binarize_labels([0, 1, 5])


def test_load_keeps_latest_rating(toy_csv):
    dataset = load_csv(toy_csv)
    assert len(dataset) == 4
    assert dataset.num_users == 2
    assert dataset.num_songs == 3
    assert list(dataset.user_ids) == ["alice", "bob"]
    assert list(dataset.song_ids) == ["s2", "s1", "s3"]

    labels = {
        (r.user_id, r.song_id): r.label for r in dataset.frame.itertuples(index=False)
    }
    assert labels == {
        ("alice", "s2"): 0,
        ("bob", "s1"): 1,
        ("bob", "s3"): 0,
        ("alice", "s1"): 0,
    }


def test_load_segments_around_record_mean(toy_csv):
    dataset = load_csv(toy_csv)
    assert dataset.popularity_threshold == pytest.approx(52.5)
    segments = segment_by_popularity(dataset)
    assert segments == {"s1": WELL_KNOWN, "s2": LESSER_KNOWN, "s3": LESSER_KNOWN}
    assert dataset.song_segment(dataset.song_index["s1"]) == WELL_KNOWN


def test_popularity_equal_to_mean_is_lesser_known(write_csv_text):
    path = write_csv_text(
        HEADER
        + "2021-01-01 10:00:00,u1,a,1,1,50\n"
        + "2021-01-01 10:01:00,u1,b,0,1,50\n"
    )
    dataset = load_csv(path)
    assert not dataset.song_well_known.any()


def test_feedback_filters(toy_csv):
    personalized = load_csv(toy_csv, feedback="personalized")
    random = load_csv(toy_csv, feedback="random")
    assert personalized.frame["personalized"].all()
    assert not random.frame["personalized"].any()
    assert len(personalized) + len(random) == 4
    with pytest.raises(ValueError):
        load_csv(toy_csv, feedback="sometimes")


def test_missing_column(write_csv_text):
    path = write_csv_text(
        "timestamp,user_id,song_id,liked,spotify_popularity\n"
        "2021-01-01 10:00:00,u1,a,1,50\n"
    )
    with pytest.raises(SchemaError) as info:
        load_csv(path)
    assert info.value.column == "personalized"


def test_unexpected_column(write_csv_text):
    path = write_csv_text(
        HEADER.rstrip("\n") + ",mood\n" + "2021-01-01 10:00:00,u1,a,1,1,50,happy\n"
    )
    with pytest.raises(SchemaError) as info:
        load_csv(path)
    assert info.value.column == "mood"


def test_label_outside_range(write_csv_text):
    path = write_csv_text(
        HEADER
        + "2021-01-01 10:00:00,u1,a,1,1,50\n"
        + "2021-01-01 10:01:00,u1,b,3,1,50\n"
    )
    with pytest.raises(LabelError, match="line 3"):
        load_csv(path)


@pytest.mark.parametrize(
    "row",
    [
        "not-a-time,u1,a,1,1,50",
        "2021-01-01 10:00:00,u1,a,1,1,150",
        "2021-01-01 10:00:00,u1,a,one,1,50",
        "2021-01-01 10:00:00,u1,a,1,7,50",
        "2021-01-01 10:00:00,,a,1,1,50",
    ],
)
def test_unparseable_row(write_csv_text, row):
    path = write_csv_text(HEADER + row + "\n")
    with pytest.raises(RowParseError) as info:
        load_csv(path)
    assert info.value.line == 2


def test_unparseable_row_after_blank_lines(write_csv_text):
    path = write_csv_text(
        HEADER
        + "2021-01-01 10:00:00,u1,a,1,1,50\n"
        + "\n"
        + "\n"
        + "2021-01-01 10:00:00,u1,b,1,1,150\n"
    )
    with pytest.raises(RowParseError) as info:
        load_csv(path)
    assert info.value.line == 5


def test_blank_lines_are_skipped(write_csv_text):
    path = write_csv_text(
        HEADER
        + "2021-01-01 10:00:00,u1,a,1,1,50\n"
        + "\n"
        + "2021-01-01 10:01:00,u2,a,0,1,50\n"
        + "\n"
    )
    assert len(load_csv(path)) == 2


def test_label_line_counts_quoted_newlines(write_csv_text):
    path = write_csv_text(
        HEADER
        + '2021-01-01 10:00:00,"u\n1",a,1,1,50\n'
        + "2021-01-01 10:01:00,u2,b,5,1,50\n"
    )
    with pytest.raises(LabelError, match="line 4"):
        load_csv(path)


def test_header_only_file_is_empty(write_csv_text):
    with pytest.raises(EmptyDatasetError):
        load_csv(write_csv_text(HEADER))


def test_empty_file(write_csv_text):
    with pytest.raises(SchemaError):
        load_csv(write_csv_text(""))


def test_build_dataset_rejects_empty_frame():
    with pytest.raises(EmptyDatasetError):
        build_dataset(pd.DataFrame(columns=["user_id", "song_id"]))


def test_records(toy_csv):
    records = list(load_csv(toy_csv).records())
    assert [r.label for r in records] == [0, 2, 0, 0]
    assert records[1].personalized
    assert records[0].artist_popularity == 20


def test_write_csv_reloads(tmp_path, synthetic):
    path = tmp_path / "synthetic.csv"
    write_csv(synthetic, path)
    reloaded = load_csv(path)
    assert list(reloaded.user_ids) == list(synthetic.user_ids)
    assert list(reloaded.song_ids) == list(synthetic.song_ids)
    for a, b in zip(reloaded.interactions(), synthetic.interactions()):
        np.testing.assert_array_equal(a, b)
    np.testing.assert_array_equal(reloaded.song_well_known, synthetic.song_well_known)


def test_write_csv_keeps_subsecond_utc_timestamps(tmp_path, write_csv_text):
    source = write_csv_text(
        HEADER
        + "2021-01-01T10:00:00.250+02:00,u1,a,1,1,50\n"
        + "2021-01-01T10:00:00.750+02:00,u1,b,0,1,50\n"
        + "2021-01-01T10:00:01+00:00,u2,a,2,0,40\n"
    )
    dataset = load_csv(source)
    path = tmp_path / "out.csv"
    write_csv(dataset, path)
    assert "2021-01-01T08:00:00.250000+00:00" in path.read_text()
    reloaded = load_csv(path)
    pd.testing.assert_series_equal(
        reloaded.frame["timestamp"], dataset.frame["timestamp"]
    )


def test_segments_match_stored_split(synthetic):
    segments = segment_by_popularity(synthetic)
    for song, song_id in enumerate(synthetic.song_ids):
        assert segments[song_id] == synthetic.song_segment(song)


def test_synthetic_labels_follow_planted_signs(planted):
    dataset, factors = planted
    users, songs, labels = dataset.interactions()
    expected = factors.scores(users, songs) > 0
    np.testing.assert_array_equal(labels == 1, expected)


def test_synthetic_covers_every_user_and_song():
    dataset, _ = generate_synthetic(7, 19, 2, 0.1, 0.0, seed=5)
    assert dataset.num_users == 7
    assert dataset.num_songs == 19
    assert len(dataset) == max(19, round(0.1 * 7 * 19))
    pairs = dataset.frame[["user", "song"]].drop_duplicates()
    assert len(pairs) == len(dataset)


def test_synthetic_has_both_segments(synthetic):
    assert synthetic.song_well_known.any()
    assert (~synthetic.song_well_known).any()


def test_synthetic_is_deterministic():
    a, _ = generate_synthetic(10, 10, 2, 0.5, 0.1, seed=9)
    b, _ = generate_synthetic(10, 10, 2, 0.5, 0.1, seed=9)
    pd.testing.assert_frame_equal(a.frame, b.frame)


def test_synthetic_rejects_bad_parameters():
    with pytest.raises(ValueError):
        generate_synthetic(5, 1, 2, 0.5, 0.0, seed=0)
    with pytest.raises(ValueError):
        generate_synthetic(5, 5, 2, 0.0, 0.0, seed=0)
    with pytest.raises(ValueError):
        generate_synthetic(5, 5, 2, 0.5, 0.5, seed=0)


def test_summary(toy_csv):
    summary = dataset_summary(load_csv(toy_csv))
    assert summary.num_interactions == 4
    assert summary.like_rate == pytest.approx(0.25)
    assert summary.superlike_rate == pytest.approx(0.25)
    assert summary.personalized_rate == pytest.approx(0.5)
    assert summary.well_known_songs == 1
    assert summary.lesser_known_songs == 2
    assert summary.user_like_rates[0] == 0.0
    assert summary.user_like_rates[-1] == pytest.approx(0.5)


def test_synthetic_flip_rate():
    dataset, factors = generate_synthetic(120, 120, 3, 0.8, 0.1, seed=2)
    users, songs, labels = dataset.interactions()
    flipped = (labels == 1) != (factors.scores(users, songs) > 0)
    assert len(labels) >= 10000
    assert flipped.mean() == pytest.approx(0.1, abs=0.02)
