"""spikenav: LIDAR spike-frame obstacle avoidance with leaky spiking networks.

Synthetic session generation, a convolutional LIF network fused with robot
kinematics, surrogate-gradient BPTT training, and the membrane-leakage,
precision and FLOPs analyses, all behind one CLI (``spikenav``).
"""

from .flops import FlopsReport, count_flops, measure_activity
from .lif import LIFLayerState, LIFParams, lif_step, smooth_spike, surrogate_grad
from .network import (ForwardTrace, LayerSpec, NetworkModel, bptt_backward,
                      forward_sequence, fusion_layers, init_model, load_weights,
                      network_forward_step, save_weights)
from .raster import (CartesianPoint, LidarDetection, SpikeFrame, cell_center,
                     polar_to_cartesian, rasterize_scan)
from .session import (CommandVector, KinematicsVector, Session, Window,
                      load_dataset, load_session, make_windows, save_session,
                      sessions_equal)
from .simgen import (Bounds, LidarModel, OracleConfig, Rect, RobotState,
                     WorldSpec, generate_dataset, generate_session,
                     oracle_policy, raycast, scenario_families, step_dynamics)
from .stats import WelchInput, WelchResult, student_t_cdf, welch_t_test
from .sweep import SweepResult, alpha_sweep
from .training import (AdamState, FoldSplit, TrainConfig, TrainReport,
                       adam_step, evaluate_model, kfold_split, mse_loss,
                       train_model)

__version__ = "0.1.0"
