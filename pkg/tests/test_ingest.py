import random

import pytest

from sockdetect.errors import InputError
from sockdetect.ingest import (
    InteractionGraph,
    MessageRecord,
    build_interaction_graph,
    convert_telegram_export,
    parse_messages,
    parse_messages_path,
    read_edges_tsv,
    write_edges_tsv,
)

EXPECTED_FIXTURE_TSV = (
    "alice\tbob\t1\n"
    "bob\talice\t2\n"
    "bob\tcarol\t1\n"
    "carol\talice\t1\n"
    "carol\tdave\t1\n"
    "erin\tcarol\t1\n"
)


class TestParseMessages:
    def test_full_record(self):
        records = parse_messages(['{"message_id": 10, "sender": "u1", "reply_to": 3}'])
        assert records == [MessageRecord(10, "u1", 3)]

    def test_reply_to_absent(self):
        records = parse_messages(['{"message_id": 11, "sender": "u2"}'])
        assert records == [MessageRecord(11, "u2", None)]

    def test_missing_message_id(self):
        with pytest.raises(InputError, match="missing message_id at line 1"):
            parse_messages(['{"sender": "u1"}'])

    def test_missing_sender(self):
        with pytest.raises(InputError, match="missing sender at line 1"):
            parse_messages(['{"message_id": 1}'])

    def test_line_numbers_skip_blanks(self):
        lines = ["", '{"message_id": 1, "sender": "a"}', "", "not json"]
        with pytest.raises(InputError, match="line 4"):
            parse_messages(lines)

    def test_duplicate_id_names_both_lines(self):
        lines = [
            '{"message_id": 7, "sender": "a"}',
            '{"message_id": 8, "sender": "b"}',
            '{"message_id": 7, "sender": "c"}',
        ]
        with pytest.raises(InputError) as err:
            parse_messages(lines)
        assert "duplicate message_id 7" in str(err.value)
        assert "line 3" in str(err.value)
        assert "line 1" in str(err.value)

    def test_non_integer_message_id(self):
        with pytest.raises(InputError, match="message_id must be an integer"):
            parse_messages(['{"message_id": "x", "sender": "a"}'])
        with pytest.raises(InputError, match="message_id must be an integer"):
            parse_messages(['{"message_id": true, "sender": "a"}'])

    def test_non_integer_reply_to(self):
        with pytest.raises(InputError, match="reply_to must be an integer"):
            parse_messages(['{"message_id": 1, "sender": "a", "reply_to": "b"}'])

    def test_null_reply_to_means_absent(self):
        records = parse_messages(['{"message_id": 1, "sender": "a", "reply_to": null}'])
        assert records[0].reply_to is None

    def test_numeric_sender_normalized_to_decimal_string(self):
        records = parse_messages(['{"message_id": 1, "sender": 42}'])
        assert records[0].sender == "42"

    def test_empty_sender_rejected(self):
        with pytest.raises(InputError, match="sender must be non-empty"):
            parse_messages(['{"message_id": 1, "sender": ""}'])

    def test_unknown_fields_ignored_and_order_kept(self):
        lines = [
            '{"message_id": 5, "sender": "a", "text": "hi", "views": 3}',
            "",
            '{"message_id": 2, "sender": "b"}',
        ]
        records = parse_messages(lines)
        assert [r.message_id for r in records] == [5, 2]

    def test_non_object_line(self):
        with pytest.raises(InputError, match="expected an object at line 1"):
            parse_messages(["[1, 2]"])


class TestTelegramExport:
    def test_fixture_conversion(self, fixtures_dir):
        import json

        document = json.loads((fixtures_dir / "telegram_export.json").read_text())
        records = convert_telegram_export(document)
        assert records == [
            MessageRecord(1, "user111", None),
            MessageRecord(3, "user222", 1),
            MessageRecord(4, "333", None),
        ]

    def test_service_messages_skipped(self):
        doc = {
            "messages": [
                {"id": 1, "from_id": "user1"},
                {"id": 2, "action": "pin_message"},
                {"id": 3, "from_id": "user2"},
                {"id": 4, "from_id": "user3"},
            ]
        }
        assert len(convert_telegram_export(doc)) == 3

    def test_document_order_preserved(self):
        doc = {"messages": [{"id": 5, "from_id": "a"}, {"id": 2, "from_id": "b"}, {"id": 9, "from_id": "c"}]}
        assert [r.message_id for r in convert_telegram_export(doc)] == [5, 2, 9]

    def test_bare_array_accepted(self):
        assert len(convert_telegram_export([{"id": 1, "from_id": "a"}])) == 1

    def test_empty_export(self):
        with pytest.raises(InputError, match="empty export"):
            convert_telegram_export({"messages": [{"id": 1, "action": "service"}]})

    def test_no_message_array(self):
        with pytest.raises(InputError, match="no message array"):
            convert_telegram_export({"name": "x"})

    def test_message_without_id(self):
        with pytest.raises(InputError, match="no id"):
            convert_telegram_export({"messages": [{"from_id": "a"}]})

    def test_duplicate_ids_rejected(self):
        doc = {"messages": [{"id": 1, "from_id": "a"}, {"id": 1, "from_id": "b"}]}
        with pytest.raises(InputError, match="duplicate message id 1"):
            convert_telegram_export(doc)

    def test_round_trips_through_jsonl(self):
        import json

        doc = {"messages": [{"id": 1, "from_id": "a"}, {"id": 2, "from_id": "b", "reply_to_message_id": 1}]}
        records = convert_telegram_export(doc)
        lines = [
            json.dumps(
                {"message_id": r.message_id, "sender": r.sender}
                | ({"reply_to": r.reply_to} if r.reply_to is not None else {})
            )
            for r in records
        ]
        assert parse_messages(lines) == records


class TestBuildGraph:
    def test_two_replies_make_weight_two(self):
        # hand count: u1 answers two distinct messages authored by u2
        messages = [
            MessageRecord(1, "u2"),
            MessageRecord(2, "u2"),
            MessageRecord(3, "u1", reply_to=1),
            MessageRecord(4, "u1", reply_to=2),
        ]
        graph = build_interaction_graph(messages)
        assert graph.edges == {("u1", "u2"): 2}
        assert graph.nodes == {"u1", "u2"}

    def test_unresolved_reply_ignored(self):
        messages = [MessageRecord(1, "u1", reply_to=999)]
        graph = build_interaction_graph(messages)
        assert graph.edges == {}
        assert graph.nodes == {"u1"}

    def test_self_reply_ignored(self):
        messages = [MessageRecord(1, "u1"), MessageRecord(2, "u1", reply_to=1)]
        assert build_interaction_graph(messages).edges == {}

    def test_weight_sum_equals_resolved_cross_sender_replies(self):
        records = _random_messages(seed=3, count=400, users=30)
        graph = build_interaction_graph(records)
        author = {r.message_id: r.sender for r in records}
        resolved = sum(
            1
            for r in records
            if r.reply_to in author and author[r.reply_to] != r.sender
        )
        assert sum(graph.edges.values()) == resolved

    def test_permutation_invariance(self):
        records = _random_messages(seed=11, count=300, users=25)
        graph1 = build_interaction_graph(records)
        shuffled = records[:]
        random.Random(5).shuffle(shuffled)
        graph2 = build_interaction_graph(shuffled)
        assert graph1.nodes == graph2.nodes
        assert graph1.edges == graph2.edges

    def test_invariants_on_random_input(self):
        graph = build_interaction_graph(_random_messages(seed=7, count=500, users=40))
        graph.validate()
        assert all(w >= 1 for w in graph.edges.values())
        assert all(src != dst for src, dst in graph.edges)


class TestFixtureCorpus:
    def test_hand_counted_totals(self, fixtures_dir):
        records = parse_messages_path(fixtures_dir / "small.jsonl")
        assert len(records) == 12
        graph = build_interaction_graph(records)
        # frozen in fixtures/README.md
        assert graph.node_count == 6
        assert graph.edge_count == 6
        assert sum(graph.edges.values()) == 7
        assert graph.edges[("bob", "alice")] == 2

    def test_edge_tsv_bytes(self, fixtures_dir, tmp_path):
        graph = build_interaction_graph(parse_messages_path(fixtures_dir / "small.jsonl"))
        out = tmp_path / "edges.tsv"
        write_edges_tsv(graph, out)
        assert out.read_text() == EXPECTED_FIXTURE_TSV


class TestEdgeTsv:
    def test_round_trip(self, tmp_path):
        graph = build_interaction_graph(_random_messages(seed=19, count=200, users=15))
        path = tmp_path / "edges.tsv"
        write_edges_tsv(graph, path)
        loaded = read_edges_tsv(path)
        assert loaded.edges == graph.edges
        # nodes without edges are not representable in the TSV
        touched = {u for edge in graph.edges for u in edge}
        assert loaded.nodes == touched

    def test_rows_sorted(self, tmp_path):
        graph = InteractionGraph(
            nodes={"b", "a", "c"}, edges={("c", "a"): 1, ("a", "b"): 2, ("b", "a"): 3}
        )
        path = tmp_path / "edges.tsv"
        write_edges_tsv(graph, path)
        assert path.read_text().splitlines() == ["a\tb\t2", "b\ta\t3", "c\ta\t1"]

    @pytest.mark.parametrize(
        "row",
        ["a\tb", "a\tb\tx", "a\tb\t0", "a\ta\t1", "\tb\t1"],
    )
    def test_malformed_rows_rejected(self, tmp_path, row):
        path = tmp_path / "bad.tsv"
        path.write_text(row + "\n")
        with pytest.raises(InputError):
            read_edges_tsv(path)

    def test_empty_file_is_empty_graph(self, tmp_path):
        path = tmp_path / "empty.tsv"
        path.write_text("")
        graph = read_edges_tsv(path)
        assert graph.node_count == 0 and graph.edge_count == 0


def _random_messages(seed: int, count: int, users: int) -> list[MessageRecord]:
    rng = random.Random(seed)
    records = []
    for mid in range(1, count + 1):
        sender = f"u{rng.randrange(users)}"
        reply_to = None
        if mid > 1 and rng.random() < 0.6:
            # occasionally point outside the corpus
            reply_to = rng.randrange(1, count + 20)
        records.append(MessageRecord(mid, sender, reply_to))
    return records
