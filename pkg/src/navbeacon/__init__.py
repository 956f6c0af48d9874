"""navbeacon: multimodal goal-pose pipeline for a simulated mobile robot.

A spatial pointer stream and speech-derived intent are fused into
persistent navigation beacons; beacons are dispatched to a robot over a
framed TCP bridge, and sessions replay deterministically for metrics.
"""

__version__ = "0.1.0"

from .clustering import Cluster, ClusterParams, PointerSample, sequential_cluster
from .fusion import CaptureWindow, FusionEngine, FusionOutcome, Mode, OutcomeKind
from .geometry import AnchorTransform, FrameId, Pose, Quat, Vec3
from .intent import BackendConfig, IntentResult, Keyword, Utterance
from .world_store import MRBeacon, MRLabel, WorldStore

__all__ = [
    "AnchorTransform",
    "BackendConfig",
    "CaptureWindow",
    "Cluster",
    "ClusterParams",
    "FrameId",
    "FusionEngine",
    "FusionOutcome",
    "IntentResult",
    "Keyword",
    "MRBeacon",
    "MRLabel",
    "Mode",
    "OutcomeKind",
    "PointerSample",
    "Pose",
    "Quat",
    "Utterance",
    "Vec3",
    "WorldStore",
    "sequential_cluster",
]
