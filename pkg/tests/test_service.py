import json
import os

import numpy as np
import pytest

from fairaudit.service import AuditEngine, AuditError, build_app


def make_engine(table, log_path, **kwargs):
    labels = list(table.column("compas_pred"))
    defaults = dict(n_subsets=20, subset_size=50, seed=0)
    defaults.update(kwargs)
    return AuditEngine(table, "compas", str(log_path), labels, **defaults)


def drive(engine, session_id, n, verdict_for=None):
    """Serve and judge n tuples; verdict_for maps row_id to verdict."""
    results = []
    for _ in range(n):
        card = engine.next_tuple(session_id)
        assert card["status"] == "ok"
        rid = card["row_id"]
        verdict = verdict_for(rid) if verdict_for else 0
        results.append(engine.submit_judgment(session_id, rid, verdict=verdict))
    return results


class TestSessions:
    def test_session_serves_each_row_exactly_once(self, compas_table, tmp_path):
        engine = make_engine(compas_table, tmp_path / "log.jsonl")
        state = engine.create_session("aud-1")
        served = []
        for _ in range(len(state.row_ids)):
            card = engine.next_tuple(state.session_id)
            served.append(card["row_id"])
            engine.submit_judgment(state.session_id, card["row_id"], verdict=0)
        assert served == list(state.row_ids)
        assert len(set(served)) == len(served)
        done = engine.next_tuple(state.session_id)
        assert done["status"] == "complete"
        assert engine.session_view(state.session_id)["status"] == "complete"

    def test_card_shape(self, compas_table, tmp_path):
        engine = make_engine(compas_table, tmp_path / "log.jsonl")
        state = engine.create_session("aud-1")
        card = engine.next_tuple(state.session_id)
        assert set(card) == {"row_id", "features", "system_label", "progress", "status"}
        # the ground-truth outcome must never be shown to the auditor
        assert "two_year_recid" not in card["features"]
        assert card["system_label"] in (0, 1)
        assert card["progress"]["total"] == 50

    def test_duplicate_judgment_conflicts(self, compas_table, tmp_path):
        engine = make_engine(compas_table, tmp_path / "log.jsonl")
        state = engine.create_session("aud-1")
        card = engine.next_tuple(state.session_id)
        engine.submit_judgment(state.session_id, card["row_id"], verdict=1)
        with pytest.raises(AuditError) as err:
            engine.submit_judgment(state.session_id, card["row_id"], verdict=1)
        assert err.value.code == "conflict"

    def test_unserved_row_conflicts(self, compas_table, tmp_path):
        engine = make_engine(compas_table, tmp_path / "log.jsonl")
        state = engine.create_session("aud-1")
        engine.next_tuple(state.session_id)
        unserved = state.row_ids[5]
        with pytest.raises(AuditError) as err:
            engine.submit_judgment(state.session_id, unserved, verdict=0)
        assert err.value.code == "conflict"

    def test_invalid_inputs(self, compas_table, tmp_path):
        engine = make_engine(compas_table, tmp_path / "log.jsonl")
        state = engine.create_session("aud-1")
        card = engine.next_tuple(state.session_id)
        with pytest.raises(AuditError) as err:
            engine.submit_judgment(state.session_id, card["row_id"], verdict=7)
        assert err.value.code == "invalid"
        with pytest.raises(AuditError) as err:
            engine.submit_judgment(state.session_id, card["row_id"])
        assert err.value.code == "invalid"
        with pytest.raises(AuditError) as err:
            engine.submit_judgment(state.session_id, card["row_id"], label=99)
        assert err.value.code == "invalid"
        with pytest.raises(AuditError) as err:
            engine.create_session("")
        assert err.value.code == "invalid"

    def test_unknown_session_not_found(self, compas_table, tmp_path):
        engine = make_engine(compas_table, tmp_path / "log.jsonl")
        for call in (engine.next_tuple, engine.session_view, engine.report):
            with pytest.raises(AuditError) as err:
                call("nope")
            assert err.value.code == "not-found"

    def test_subsets_are_disjoint_until_exhausted(self, compas_table, tmp_path):
        engine = make_engine(compas_table, tmp_path / "log.jsonl", n_subsets=3)
        seen: set[int] = set()
        for i in range(3):
            state = engine.create_session(f"aud-{i}")
            overlap = seen & set(state.row_ids)
            assert not overlap
            seen |= set(state.row_ids)
        with pytest.raises(AuditError) as err:
            engine.create_session("aud-overflow")
        assert err.value.code == "exhausted"

    def test_requesting_a_taken_subset_conflicts(self, compas_table, tmp_path):
        engine = make_engine(compas_table, tmp_path / "log.jsonl")
        engine.create_session("aud-1", subset=4)
        with pytest.raises(AuditError) as err:
            engine.create_session("aud-2", subset=4)
        assert err.value.code == "conflict"
        with pytest.raises(AuditError) as err:
            engine.create_session("aud-2", subset=99)
        assert err.value.code == "invalid"

    def test_reuse_flag_lifts_exhaustion(self, compas_table, tmp_path):
        engine = make_engine(
            compas_table, tmp_path / "log.jsonl", n_subsets=2, allow_subset_reuse=True
        )
        for i in range(4):
            engine.create_session(f"aud-{i}")

    def test_resume_view_carries_pending_card(self, compas_table, tmp_path):
        engine = make_engine(compas_table, tmp_path / "log.jsonl")
        state = engine.create_session("aud-1")
        card = engine.next_tuple(state.session_id)
        view = engine.session_view(state.session_id)
        assert view["served"] == 1
        assert view["judged"] == 0
        assert view["pending_card"]["row_id"] == card["row_id"]
        engine.submit_judgment(state.session_id, card["row_id"], verdict=0)
        view = engine.session_view(state.session_id)
        assert view["pending_card"] is None
        assert view["judged"] == 1


class TestReports:
    def test_profile_gated_until_refit_threshold(self, compas_table, tmp_path):
        engine = make_engine(compas_table, tmp_path / "log.jsonl")
        state = engine.create_session("aud-1")
        drive(engine, state.session_id, 9)
        report = engine.report(state.session_id)
        assert report["profile"] is None
        assert "insufficient data" in report["note"]
        drive(engine, state.session_id, 1)
        report = engine.report(state.session_id)
        assert report["profile"] is not None
        assert report["profile"]["fitted_at"] == 10

    def test_fitted_at_snaps_to_refit_multiples(self, compas_table, tmp_path):
        engine = make_engine(compas_table, tmp_path / "log.jsonl")
        state = engine.create_session("aud-1")
        drive(engine, state.session_id, 17)
        report = engine.report(state.session_id)
        assert report["judged"] == 17
        assert report["profile"]["fitted_at"] == 10
        drive(engine, state.session_id, 3)
        assert engine.report(state.session_id)["profile"]["fitted_at"] == 20

    def test_report_is_pure(self, compas_table, tmp_path):
        log = tmp_path / "log.jsonl"
        engine = make_engine(compas_table, log)
        state = engine.create_session("aud-1")
        drive(engine, state.session_id, 12)
        size_before = os.path.getsize(log)
        first = engine.report(state.session_id)
        second = engine.report(state.session_id)
        assert first == second
        assert os.path.getsize(log) == size_before

    def test_accepting_everything_fits_the_system_labels(self, compas_table, tmp_path):
        engine = make_engine(compas_table, tmp_path / "log.jsonl")
        state = engine.create_session("aud-1")
        drive(engine, state.session_id, 20, verdict_for=lambda rid: 0)
        profile = engine.report(state.session_id)["profile"]
        # verdict 0 keeps the system label, so the fitted model sees the
        # system's own labeling and the notion table reflects it
        assert profile["model"]["accuracy"] >= 0.8
        assert set(profile["notions"]) == {"sex", "race"}
        for flags in profile["notions"].values():
            assert set(flags) == {
                "statistical-parity", "equal-opportunity", "calibration"
            }
            assert all(v in ("yes", "no", "undefined") for v in flags.values())
        assert 0.0 <= profile["consistency"] <= 1.0

    def test_label_elicitation_derives_the_verdict(self, compas_table, tmp_path):
        engine = make_engine(compas_table, tmp_path / "log.jsonl")
        state = engine.create_session("aud-1")
        card = engine.next_tuple(state.session_id)
        system = card["system_label"]
        ack = engine.submit_judgment(state.session_id, card["row_id"], label=1 - system)
        assert ack["judged"] == 1
        record = [
            json.loads(line)
            for line in open(engine.log_path, encoding="utf-8")
        ][-1]
        assert record["kind"] == "judgment"
        assert record["verdict"] == 1  # disagreeing label means a flag at epsilon 1
        assert record["label"] == 1 - system
        card = engine.next_tuple(state.session_id)
        ack = engine.submit_judgment(
            state.session_id, card["row_id"], label=card["system_label"]
        )
        record = [
            json.loads(line)
            for line in open(engine.log_path, encoding="utf-8")
        ][-1]
        assert record["verdict"] == 0


class TestEventLog:
    def test_header_is_first_line(self, compas_table, tmp_path):
        log = tmp_path / "log.jsonl"
        make_engine(compas_table, log)
        first = json.loads(open(log, encoding="utf-8").readline())
        assert first == {"kind": "log-header", "version": 1, "dataset": "compas"}

    def test_every_action_is_one_record(self, compas_table, tmp_path):
        log = tmp_path / "log.jsonl"
        engine = make_engine(compas_table, log)
        state = engine.create_session("aud-1")
        drive(engine, state.session_id, 5)
        lines = open(log, encoding="utf-8").read().splitlines()
        # header + created + 5 served + 5 judged
        assert len(lines) == 12
        kinds = [json.loads(line)["kind"] for line in lines]
        assert kinds.count("session_created") == 1
        assert kinds.count("tuple_served") == 5
        assert kinds.count("judgment") == 5
        seqs = [json.loads(line)["seq"] for line in lines[1:]]
        assert seqs == list(range(1, 12))

    def test_session_seq_is_contiguous_per_session(self, compas_table, tmp_path):
        log = tmp_path / "log.jsonl"
        engine = make_engine(compas_table, log)
        a = engine.create_session("aud-a")
        b = engine.create_session("aud-b")
        # interleave the two sessions
        for _ in range(4):
            card = engine.next_tuple(a.session_id)
            engine.next_tuple(b.session_id)
            engine.submit_judgment(a.session_id, card["row_id"], verdict=0)
        per_session: dict[str, list[int]] = {}
        for line in open(log, encoding="utf-8"):
            record = json.loads(line)
            if "session_seq" in record:
                per_session.setdefault(record["session_id"], []).append(
                    record["session_seq"]
                )
        for seqs in per_session.values():
            assert seqs == list(range(1, len(seqs) + 1))

    def test_replay_reconstructs_engine_exactly(self, compas_table, tmp_path):
        log = tmp_path / "log.jsonl"
        engine = make_engine(compas_table, log)
        rng = np.random.default_rng(31)
        sessions = [engine.create_session(f"aud-{i}").session_id for i in range(6)]
        # randomized interleaved workload across all sessions
        for _ in range(400):
            sid = sessions[int(rng.integers(len(sessions)))]
            if rng.random() < 0.5:
                card = engine.next_tuple(sid)
                if card["status"] != "ok":
                    continue
            state = engine._sessions[sid]
            pending = state.pending()
            if pending and rng.random() < 0.8:
                engine.submit_judgment(
                    sid, pending[0], verdict=int(rng.integers(0, 2))
                )

        twin = make_engine(compas_table, log)
        assert twin._seq == engine._seq
        assert set(twin._sessions) == set(engine._sessions)
        for sid in sessions:
            ours, theirs = engine._sessions[sid], twin._sessions[sid]
            assert ours.served == theirs.served
            assert ours.judgments == theirs.judgments
            assert ours.row_ids == theirs.row_ids
            assert json.dumps(engine.report(sid), sort_keys=True) == json.dumps(
                twin.report(sid), sort_keys=True
            )
            assert engine.session_view(sid) == twin.session_view(sid)
        # replay must not have appended anything
        assert twin.export() == engine.export()

    def test_export_filters_by_auditor(self, compas_table, tmp_path):
        engine = make_engine(compas_table, tmp_path / "log.jsonl")
        a = engine.create_session("alice")
        b = engine.create_session("bob")
        drive(engine, a.session_id, 2)
        drive(engine, b.session_id, 3)
        everything = engine.export().splitlines()
        assert len(everything) == 1 + 2 + 4 + 6
        only_alice = engine.export("alice").splitlines()
        assert json.loads(only_alice[0])["kind"] == "log-header"
        body = [json.loads(line) for line in only_alice[1:]]
        assert all(r["session_id"] == a.session_id for r in body)
        assert len(body) == 5


class TestHttpApi:
    @pytest.fixture()
    def client(self, compas_table, tmp_path):
        from fastapi.testclient import TestClient

        engine = make_engine(compas_table, tmp_path / "log.jsonl")
        return TestClient(build_app(engine))

    def test_health(self, client):
        reply = client.get("/health")
        assert reply.status_code == 200
        assert reply.json() == {"status": "ok", "dataset": "compas"}

    def test_full_audit_over_http(self, client):
        created = client.post("/sessions", json={"auditor_id": "alice"})
        assert created.status_code == 200
        sid = created.json()["session_id"]
        assert created.json()["total"] == 50

        for i in range(10):
            card = client.get(f"/sessions/{sid}/next").json()
            assert card["status"] == "ok"
            ack = client.post(
                f"/sessions/{sid}/judgments",
                json={"row_id": card["row_id"], "verdict": i % 2},
            )
            assert ack.status_code == 200
            assert ack.json()["judged"] == i + 1

        report = client.get(f"/sessions/{sid}/report")
        assert report.status_code == 200
        assert report.json()["profile"]["fitted_at"] == 10

        view = client.get(f"/sessions/{sid}")
        assert view.status_code == 200
        assert view.json()["judged"] == 10

        export = client.get("/export")
        assert export.status_code == 200
        assert export.headers["content-type"].startswith("text/plain")
        assert export.text.splitlines()[0].startswith('{"kind": "log-header"')

    def test_codes_404_409_422(self, client):
        assert client.get("/sessions/missing/next").status_code == 404
        assert client.get("/sessions/missing/report").status_code == 404

        sid = client.post("/sessions", json={"auditor_id": "a"}).json()["session_id"]
        card = client.get(f"/sessions/{sid}/next").json()
        ok = {"row_id": card["row_id"], "verdict": 1}
        assert client.post(f"/sessions/{sid}/judgments", json=ok).status_code == 200
        assert client.post(f"/sessions/{sid}/judgments", json=ok).status_code == 409

        bad_verdict = {"row_id": card["row_id"], "verdict": 5}
        assert client.post(f"/sessions/{sid}/judgments", json=bad_verdict).status_code == 422
        assert client.post(f"/sessions/{sid}/judgments", json={}).status_code == 422
        assert client.post("/sessions", json={}).status_code == 422
        assert client.post(
            "/sessions", json={"auditor_id": "b", "subset": "x"}
        ).status_code == 422

        taken = client.post("/sessions", json={"auditor_id": "c", "subset": 3})
        assert taken.status_code == 200
        again = client.post("/sessions", json={"auditor_id": "d", "subset": 3})
        assert again.status_code == 409
