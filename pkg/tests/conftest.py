import numpy as np
import pytest

from spikenav.raster import LidarDetection
from spikenav.session import CommandVector, KinematicsVector, Session
from spikenav.simgen import generate_dataset, scenario_families
from spikenav.session import load_dataset

CI_SEED = 7


def make_session(n_frames: int = 5, session_id: str = "toy", seed: int = 0,
                 fps: float = 10.0) -> Session:
    """Small synthetic-by-hand session with a few detections per frame."""
    rng = np.random.default_rng(seed)
    detections = []
    kin = []
    cmds = []
    pairs = [(1, 1), (-1, 1), (1, -1), (-1, -1)]
    for k in range(n_frames):
        frame = []
        for _ in range(rng.integers(0, 6)):
            deg = float(rng.integers(0, 360))
            frame.append(LidarDetection(range_m=float(rng.uniform(0.1, 4.5)),
                                        angle_rad=np.radians(deg)))
        detections.append(tuple(frame))
        kin.append(KinematicsVector(*rng.normal(0, 1, size=5)))
        cmds.append(CommandVector(*pairs[rng.integers(0, 4)]))
    return Session(id=session_id, fps=fps, detections=tuple(detections),
                   kinematics=tuple(kin), commands=tuple(cmds),
                   source="synthetic", seed=seed)


@pytest.fixture(scope="session")
def ci_dataset(tmp_path_factory):
    """The seed-fixed CI dataset: 6 scenario families x 2 sessions."""
    root = tmp_path_factory.mktemp("ci_data")
    generate_dataset(scenario_families(base_seed=CI_SEED), 2, str(root))
    return load_dataset(root)
