"""Test manifest loading, filtering and sharding."""

import random
from fractions import Fraction
from pathlib import Path

import pytest

from lalmeval.dataset.filters import apply_filters
from lalmeval.dataset.manifest import load_manifest
from lalmeval.dataset.sharding import apportion, shard_dataset
from lalmeval.domain.errors import DuplicateIdError, ManifestError, ManifestIoError
from lalmeval.domain.models import FilterSpec
from tests.factories import endpoint, manifest_line, sample, write_manifest, write_wav


class TestLoadManifest:
    """Tests for JSONL manifest ingestion."""

    def test_records_in_file_order(self, tmp_path: Path) -> None:
        """A 3-line manifest gives 3 records in file order."""
        path = write_manifest(tmp_path / "m.jsonl", [manifest_line(s) for s in ("c", "a", "b")])

        samples = load_manifest(path)

        assert [s.sample_id for s in samples] == ["c", "a", "b"]
        assert samples[0].reference.value == "hello world"

    def test_missing_reference_names_line(self, tmp_path: Path) -> None:
        """A line without a reference is reported with its line number."""
        broken = manifest_line("b")
        del broken["reference"]
        path = write_manifest(tmp_path / "m.jsonl", [manifest_line("a"), broken])

        with pytest.raises(ManifestError) as exc_info:
            load_manifest(path)

        assert exc_info.value.message == "line 2: missing field reference"

    def test_duplicate_sample_id(self, tmp_path: Path) -> None:
        """Two lines sharing a sample_id are rejected."""
        path = write_manifest(tmp_path / "m.jsonl", [manifest_line("x"), manifest_line("x")])

        with pytest.raises(DuplicateIdError) as exc_info:
            load_manifest(path)

        assert "'x'" in exc_info.value.message

    def test_invalid_json(self, tmp_path: Path) -> None:
        """A line that is not JSON is a manifest error."""
        path = write_manifest(tmp_path / "m.jsonl", [manifest_line("a"), "{not json"])

        with pytest.raises(ManifestError) as exc_info:
            load_manifest(path)

        assert exc_info.value.message.startswith("line 2: invalid JSON")

    def test_blank_lines_are_skipped(self, tmp_path: Path) -> None:
        """Blank lines do not count as records but keep line numbers."""
        path = write_manifest(tmp_path / "m.jsonl", [manifest_line("a"), "", "  ", manifest_line("b")])

        assert [s.sample_id for s in load_manifest(path)] == ["a", "b"]

    def test_audio_resolved_against_manifest_dir(self, tmp_path: Path) -> None:
        """Relative audio paths resolve next to the manifest; durations add up."""
        write_wav(tmp_path / "a.wav", 0.1)
        write_wav(tmp_path / "b.wav", 0.1)
        audio = [{"path": "a.wav", "duration_s": 2.0}, {"path": "b.wav", "duration_s": 1.5}]
        path = write_manifest(tmp_path / "m.jsonl", [manifest_line("s", audio=audio)])

        record = load_manifest(path)[0]

        assert record.audio_paths == [str(tmp_path / "a.wav"), str(tmp_path / "b.wav")]
        assert record.audio_duration_s == 3.5

    def test_missing_audio_file(self, tmp_path: Path) -> None:
        """Referenced audio files must exist."""
        audio = [{"path": "gone.wav", "duration_s": 1.0}]
        path = write_manifest(tmp_path / "m.jsonl", [manifest_line("s", audio=audio)])

        with pytest.raises(ManifestError) as exc_info:
            load_manifest(path)

        assert "gone.wav" in exc_info.value.message
        assert load_manifest(path, check_audio=False)[0].audio_duration_s == 1.0

    def test_audio_index_out_of_range(self, tmp_path: Path) -> None:
        """A turn may not point past the audio list."""
        line = manifest_line("s")
        line["turns"][0]["audio_index"] = 0
        path = write_manifest(tmp_path / "m.jsonl", [line])

        with pytest.raises(ManifestError) as exc_info:
            load_manifest(path)

        assert "out of range" in exc_info.value.message

    def test_malformed_speaker_reference(self, tmp_path: Path) -> None:
        """Speaker-tagged references are parsed at load time."""
        line = manifest_line("s", reference="<spk:A> hi <spk:> there", kind="speaker_tagged")
        path = write_manifest(tmp_path / "m.jsonl", [line])

        with pytest.raises(ManifestError) as exc_info:
            load_manifest(path)

        assert exc_info.value.message.startswith("line 1: reference:")

    def test_unreadable_manifest(self, tmp_path: Path) -> None:
        """A missing manifest is an I/O error."""
        with pytest.raises(ManifestIoError):
            load_manifest(tmp_path / "absent.jsonl")


class TestApplyFilters:
    """Tests for sample filtering."""

    def test_duration_window(self) -> None:
        """Durations 2, 8 and 15 s with bounds 5..10 keep only the 8 s sample."""
        samples = [sample("a", duration_s=2.0), sample("b", duration_s=8.0), sample("c", duration_s=15.0)]

        kept = apply_filters(samples, FilterSpec(min_audio_s=5.0, max_audio_s=10.0), seed=0)

        assert [s.sample_id for s in kept] == ["b"]

    def test_empty_spec_is_identity(self) -> None:
        """An empty filter keeps everything in order."""
        samples = [sample(f"s{i}") for i in range(5)]
        assert apply_filters(samples, FilterSpec(), seed=3) == samples

    def test_max_samples_is_reproducible(self) -> None:
        """The same seed selects the same sample IDs every time."""
        samples = [sample(f"s{i:03d}") for i in range(100)]
        spec = FilterSpec(max_samples=10)

        first = [s.sample_id for s in apply_filters(samples, spec, seed=42)]
        second = [s.sample_id for s in apply_filters(samples, spec, seed=42)]

        assert first == second
        assert len(first) == 10
        assert first == sorted(first)

    def test_seed_changes_selection(self) -> None:
        """Different seeds draw different subsets."""
        samples = [sample(f"s{i:03d}") for i in range(100)]
        spec = FilterSpec(max_samples=10)

        assert apply_filters(samples, spec, seed=1) != apply_filters(samples, spec, seed=2)

    def test_idempotent(self) -> None:
        """Filtering twice equals filtering once."""
        samples = [sample(f"s{i:03d}", duration_s=float(i % 7)) for i in range(60)]
        spec = FilterSpec(min_audio_s=2.0, max_samples=15)

        once = apply_filters(samples, spec, seed=5)
        assert apply_filters(once, spec, seed=5) == once

    def test_metadata_equals(self) -> None:
        """All listed metadata fields must match."""
        samples = [
            sample("a", metadata={"lang": "en", "split": "test"}),
            sample("b", metadata={"lang": "fr", "split": "test"}),
            sample("c", metadata={"lang": "en"}),
        ]

        kept = apply_filters(samples, FilterSpec(metadata_equals={"lang": "en", "split": "test"}), seed=0)

        assert [s.sample_id for s in kept] == ["a"]


class TestSharding:
    """Tests for capacity-proportional sharding."""

    def test_eight_to_two(self) -> None:
        """100 samples over capacities [8, 2] split 80/20."""
        assert apportion(100, [8, 2]) == [80, 20]

    def test_exact_shares(self) -> None:
        """10 samples over capacities [3, 3, 4] split 3/3/4."""
        assert apportion(10, [3, 3, 4]) == [3, 3, 4]

    def test_remainder_ties_go_first(self) -> None:
        """Leftover items break ties toward earlier endpoints."""
        assert apportion(5, [1, 1, 1]) == [2, 2, 1]

    def test_rejects_bad_capacities(self) -> None:
        """Capacities must be positive."""
        with pytest.raises(ValueError):
            apportion(3, [])
        with pytest.raises(ValueError):
            apportion(3, [2, 0])

    def test_single_endpoint_takes_all(self) -> None:
        """One endpoint receives one shard with every sample."""
        samples = [sample(f"s{i}") for i in range(7)]

        shards = shard_dataset(samples, [endpoint("only", capacity=3)])

        assert len(shards) == 1
        assert shards[0].endpoint_name == "only"
        assert shards[0].samples == samples

    def test_random_partitions(self) -> None:
        """Shards are disjoint, covering, contiguous and within one of the exact share."""
        rng = random.Random(1234)
        pool = [sample(f"s{i}") for i in range(60)]
        for _ in range(1000):
            samples = pool[: rng.randint(0, 60)]
            total = len(samples)
            capacities = [rng.randint(1, 9) for _ in range(rng.randint(1, 5))]
            endpoints = [endpoint(f"e{j}", capacity=c) for j, c in enumerate(capacities)]

            shards = shard_dataset(samples, endpoints)

            assert [s.endpoint_name for s in shards] == [e.name for e in endpoints]
            assert [x for shard in shards for x in shard.samples] == samples
            weight = sum(capacities)
            for shard, capacity in zip(shards, capacities, strict=True):
                assert abs(len(shard.samples) - Fraction(total * capacity, weight)) < 1
