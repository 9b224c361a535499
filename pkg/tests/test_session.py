import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import make_session
from spikenav.raster import LidarDetection
from spikenav.session import (CommandVector, KinematicsVector, Session,
                              SessionFormatError, Window, load_dataset,
                              load_session, make_windows, save_session,
                              sessions_equal, write_manifest)


def test_command_domain():
    for pair in ((1, 1), (-1, 1), (1, -1), (-1, -1)):
        CommandVector(*pair)
    with pytest.raises(ValueError):
        CommandVector(0, 1)
    with pytest.raises(ValueError):
        CommandVector(2, -1)


def test_kinematics_must_be_finite():
    with pytest.raises(ValueError):
        KinematicsVector(0, 0, float("inf"), 0, 0)


def test_session_stream_length_mismatch_rejected():
    s = make_session(3)
    with pytest.raises(ValueError):
        Session(id="bad", fps=10.0, detections=s.detections,
                kinematics=s.kinematics[:-1], commands=s.commands)


def test_save_load_round_trip(tmp_path):
    s = make_session(6, seed=3)
    save_session(s, tmp_path / "sess")
    loaded = load_session(tmp_path / "sess")
    assert sessions_equal(s, loaded)


def test_single_frame_session_files(tmp_path):
    s = make_session(1)
    save_session(s, tmp_path / "one")
    for name in ("meta.json", "scan.csv", "kin.csv", "cmd.csv"):
        assert (tmp_path / "one" / name).exists()


def test_load_missing_file(tmp_path):
    s = make_session(2)
    save_session(s, tmp_path / "sess")
    (tmp_path / "sess" / "cmd.csv").unlink()
    with pytest.raises(SessionFormatError, match="missing file"):
        load_session(tmp_path / "sess")


def test_load_invalid_command_value(tmp_path):
    s = make_session(2)
    save_session(s, tmp_path / "sess")
    cmd = tmp_path / "sess" / "cmd.csv"
    cmd.write_text("frame,right,left\n0,0,1\n1,1,1\n")
    with pytest.raises(SessionFormatError, match="invalid command value"):
        load_session(tmp_path / "sess")


def test_load_frame_index_gap(tmp_path):
    s = make_session(3)
    save_session(s, tmp_path / "sess")
    kin = tmp_path / "sess" / "kin.csv"
    lines = kin.read_text().splitlines()
    lines[2] = lines[2].replace("1,", "7,", 1)  # frame 1 -> 7
    kin.write_text("\n".join(lines) + "\n")
    with pytest.raises(SessionFormatError, match="frame index gap"):
        load_session(tmp_path / "sess")


def test_load_malformed_number(tmp_path):
    s = make_session(2)
    save_session(s, tmp_path / "sess")
    kin = tmp_path / "sess" / "kin.csv"
    lines = kin.read_text().splitlines()
    parts = lines[1].split(",")
    parts[1] = "oops"
    lines[1] = ",".join(parts)
    kin.write_text("\n".join(lines) + "\n")
    with pytest.raises(SessionFormatError, match="malformed number"):
        load_session(tmp_path / "sess")


def test_scan_frames_must_be_nondecreasing(tmp_path):
    s = make_session(3, seed=9)
    save_session(s, tmp_path / "sess")
    scan = tmp_path / "sess" / "scan.csv"
    scan.write_text("frame,angle_deg,range_m\n2,0.0,1.0\n0,10.0,1.0\n")
    with pytest.raises(SessionFormatError, match="nondecreasing"):
        load_session(tmp_path / "sess")


@st.composite
def sessions(draw):
    n = draw(st.integers(1, 8))
    rng = np.random.default_rng(draw(st.integers(0, 2**31)))
    detections, kin, cmds = [], [], []
    pairs = [(1, 1), (-1, 1), (1, -1), (-1, -1)]
    for _ in range(n):
        m = int(rng.integers(0, 5))
        frame = [LidarDetection(float(rng.uniform(0, 10)),
                                math.radians(float(rng.uniform(0, 360)) % 360.0))
                 for _ in range(m)]
        detections.append(tuple(frame))
        kin.append(KinematicsVector(*rng.normal(0, 100, size=5)))
        cmds.append(CommandVector(*pairs[rng.integers(0, 4)]))
    return Session(id=f"hyp{draw(st.integers(0, 999))}", fps=10.0,
                   detections=tuple(detections), kinematics=tuple(kin),
                   commands=tuple(cmds), seed=draw(st.integers(0, 99)))


@given(sessions())
@settings(max_examples=40, deadline=None)
def test_round_trip_property(tmp_path_factory, s):
    d = tmp_path_factory.mktemp("rt")
    save_session(s, d / "s")
    assert sessions_equal(s, load_session(d / "s"))


def test_windows_counts():
    assert len(make_windows(make_session(200), 20)) == 10
    assert len(make_windows(make_session(19), 20)) == 0
    w = make_windows(make_session(45), 20)
    assert len(w) == 2
    assert [x.start for x in w] == [0, 20]
    assert w[-1].start + w[-1].length == 40  # frames 40..44 discarded


def test_windows_disjoint_in_order():
    s = make_session(63, seed=5)
    ws = make_windows(s, 10)
    spans = [(w.start, w.start + w.length) for w in ws]
    assert spans == sorted(spans)
    for (a1, b1), (a2, b2) in zip(spans, spans[1:]):
        assert b1 <= a2


def test_window_carries_per_frame_labels():
    s = make_session(40, seed=2)
    w = make_windows(s, 20)[1]
    assert w.labels.shape == (20, 2)
    assert np.array_equal(w.labels[0], s.commands[20].as_array())


def test_manifest_dataset_round_trip(tmp_path):
    ids = []
    for i in range(3):
        s = make_session(4, session_id=f"s{i}", seed=i)
        save_session(s, tmp_path / f"s{i}")
        ids.append(f"s{i}")
    write_manifest(tmp_path, ids)
    loaded = load_dataset(tmp_path)
    assert [s.id for s in loaded] == ids
