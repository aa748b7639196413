import json

import pytest

from commandswarm.bt_model import default_whitelist, parse_document
from commandswarm.datagen import (
    DEFAULT_ENTRIES,
    TemplateBank,
    TemplateEntry,
    behavior_histogram,
    generate_corpus,
    sample_pair,
    split_corpus,
    write_corpus,
)
from commandswarm.metrics import load_corpus


class TestTemplateBank:
    def test_default_bank_valid(self):
        bank = TemplateBank()
        assert len(bank.entries) == len(DEFAULT_ENTRIES)
        assert sum(bank.probabilities.values()) == pytest.approx(1.0)

    def test_empty_bank_rejected(self):
        with pytest.raises(ValueError):
            TemplateBank([])

    def test_invalid_template_tree_rejected(self):
        bad = TemplateEntry(name="bad", weight=1.0, instructions=("x",),
                            tree_spec={"tag": "LaunchRocket"}, slots={})
        with pytest.raises(Exception):
            TemplateBank([bad])

    def test_json_round_trip(self, tmp_path):
        bank = TemplateBank()
        path = tmp_path / "bank.json"
        path.write_text(bank.to_json())
        again = TemplateBank.from_file(path)
        assert [e.name for e in again.entries] == [e.name for e in bank.entries]
        assert again.entries[0].instructions == bank.entries[0].instructions

    def test_templates_cover_whole_whitelist(self):
        covered = set()
        for entry in DEFAULT_ENTRIES:
            import random

            _, xml = sample_pair(entry, random.Random(0))
            for leaf in parse_document(xml).tree.root_node.leaves():
                covered.add(leaf.name)
        assert covered == set(default_whitelist().names())


class TestGenerateCorpus:
    def test_exact_count_and_validity(self):
        pairs = generate_corpus(2063, seed=7)
        assert len(pairs) == 2063
        assert all(parse_document(xml).accepted for _, xml in pairs)

    def test_byte_identical_across_runs(self, tmp_path):
        a, b = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
        write_corpus(generate_corpus(2063, seed=7), a)
        write_corpus(generate_corpus(2063, seed=7), b)
        assert a.read_bytes() == b.read_bytes()

    def test_different_seeds_differ(self):
        assert generate_corpus(50, seed=1) != generate_corpus(50, seed=2)

    def test_n_must_be_positive(self):
        with pytest.raises(ValueError):
            generate_corpus(0, seed=1)

    def test_single_pair_deterministic(self):
        assert generate_corpus(1, seed=3) == generate_corpus(1, seed=3)

    def test_template_frequencies_within_3_points(self):
        bank = TemplateBank()
        named = generate_corpus(2063, seed=7, bank=bank, with_names=True)
        counts = {}
        for name, _, _ in named:
            counts[name] = counts.get(name, 0) + 1
        for entry in bank.entries:
            observed = counts.get(entry.name, 0) / len(named)
            expected = bank.probabilities[entry.name]
            assert abs(observed - expected) <= 0.03, entry.name

    def test_weighted_bank_respected(self):
        entries = [DEFAULT_ENTRIES[0], DEFAULT_ENTRIES[1]]
        bank = TemplateBank([
            TemplateEntry(entries[0].name, 3.0, entries[0].instructions,
                          entries[0].tree_spec, entries[0].slots),
            TemplateEntry(entries[1].name, 1.0, entries[1].instructions,
                          entries[1].tree_spec, entries[1].slots),
        ])
        named = generate_corpus(2000, seed=11, bank=bank, with_names=True)
        share = sum(1 for name, _, _ in named if name == entries[0].name) / 2000
        assert abs(share - 0.75) <= 0.03

    def test_instruction_and_tree_share_slots(self):
        # When an instruction mentions a color, the tree uses the same color.
        named = generate_corpus(500, seed=5, with_names=True)
        colors = {"red", "green", "blue", "yellow", "white"}
        checked = 0
        for name, instruction, xml in named:
            mentioned = [c for c in colors if c in instruction.split()]
            if not mentioned:
                continue
            leaves = parse_document(xml).tree.root_node.leaves()
            tree_colors = {leaf.params["color"] for leaf in leaves
                           if leaf.name == "ChangeColor"}
            assert tree_colors == set(mentioned)
            checked += 1
        assert checked >= 50


class TestHistogram:
    def test_counts_leaf_names(self):
        pairs = generate_corpus(300, seed=9)
        hist = behavior_histogram(pairs)
        assert sum(hist.values()) >= 300
        assert set(hist) <= set(default_whitelist().names())

    def test_all_13_names_appear_at_2063(self):
        hist = behavior_histogram(generate_corpus(2063, seed=7))
        assert set(hist) == set(default_whitelist().names())


class TestIO:
    def test_write_corpus_loadable(self, tmp_path):
        path = tmp_path / "corpus.jsonl"
        write_corpus(generate_corpus(10, seed=4), path)
        records = load_corpus(path)
        assert len(records) == 10
        assert records[0].example_id == "synth-00000"
        assert json.loads(path.read_text().splitlines()[0])["id"] == "synth-00000"

    def test_split_partitions(self):
        pairs = generate_corpus(100, seed=8)
        train, val, test = split_corpus(pairs, seed=8)
        assert (len(train), len(val), len(test)) == (80, 10, 10)
        combined = sorted(train + val + test)
        assert combined == sorted(pairs)

    def test_split_deterministic(self):
        pairs = generate_corpus(50, seed=8)
        assert split_corpus(pairs, seed=1) == split_corpus(pairs, seed=1)

    def test_split_bad_fractions(self):
        with pytest.raises(ValueError):
            split_corpus(generate_corpus(10, seed=1), seed=1, fractions=(0.5, 0.5, 0.5))
