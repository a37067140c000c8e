# robridge desk-scale settings
#
# Module level constants only. Anything an experiment may vary lives in the
# experiment config file (see robridge/items/config.py); these are the defaults
# and the physical constants of the tabletop.
import math


SCHEMA_VERSION = 1

# World (meters)
WORKSPACE_MIN = (0.0, 0.0, 0.0)
WORKSPACE_MAX = (0.64, 0.64, 0.30)
WORKSPACE_HEIGHT = WORKSPACE_MAX[2] - WORKSPACE_MIN[2]
GRIPPER_START = (0.32, 0.32, 0.20, 0.0)

MAX_STEP = 0.02  # max end-effector displacement per tick
APERTURE_RATE = 0.5  # aperture change per tick at |g| = 1
GRASP_THRESHOLD = 0.6  # aperture below this counts as closed
GRASP_DISTANCE = 0.01
HANDLE_RADIUS = 0.015
CONTACT_DISTANCE = 0.01
FINGER_RADIUS = 0.008
INTERPENETRATION_TOL = 0.001

BACKGROUND_ID = 0
GRIPPER_ID = 1
FIRST_ENTITY_ID = 2

# Gripper geometry used by the renderer
PALM_SIZE = 0.016  # third view footprint, smaller than any catalog entity
PALM_HEIGHT = 0.10  # arm body above the tip
FINGER_SIZE = (0.006, 0.02)
FINGER_GAP = (0.008, 0.012)  # closed offset, extra offset when fully open

# Cameras
THIRD_RESOLUTION = (128, 128)
THIRD_SCALE = 0.005  # m/px
FIRST_RESOLUTION = (64, 64)
FIRST_SCALE = 0.0025
MIN_RESOLUTION = 32

# IOR
PRIMITIVE_TYPES = (
    "grasp",
    "place",
    "press",
    "push",
    "pull",
    "open",
    "close",
    "turn",
    "reach",
)
DIRECTIONAL_TYPES = frozenset({"open", "close", "push", "pull", "turn"})
TENSOR_SIZE = 32
GRID_CHANNELS = 7
VEC_SIZE = 17
TRACK_RADIUS = 8.0  # px
HEATMAP_SIGMA = 1.0  # tensor cells

# HCP / closed loop
STATUS_PERIOD = 25
RETRY_BUDGET = 2
MAX_TICKS = 1000
PRIMITIVE_TIMEOUT = 200
REACH_TOLERANCE = 0.01
APPROACH_HEIGHT = 0.03
TRAVEL_HEIGHT = 0.12
CLEARANCE = 0.04
PLANNER_TIMEOUT = 10.0

# Expert-stage randomization
EXPERT_DIM_SCALE = 0.2
EXPERT_ARM_OFFSET = 0.05
EXPERT_CAMERA_ROT = math.radians(10.0)
EXPERT_CAMERA_SHIFT = 10.0

# GEA
GEA_LAYERS = {
    "grid": (GRID_CHANNELS * TENSOR_SIZE * TENSOR_SIZE, 256, 128),
    "vec": (VEC_SIZE, 32),
    "head": (128 + 32, 128, 4),
}
GEA_LR = 3e-4
GEA_BATCH = 64
GEA_BETAS = (0.9, 0.999)
GEA_EPS = 1e-8

# DAgger
DAGGER_BREAKPOINTS = (0.3, 0.7)
DAGGER_VALUES = (3.0, 2.0, 1.0)
DAGGER_BUDGET = 10
DAGGER_SUCCESS_TARGET = 0.9
DAGGER_SEED_RETRIES = 5

# GEA-stage augmentation, applied in priority order (lower first)
AUGMENT_PIPELINES = {
    "robridge.augment.depth.DepthWarpAugment": 100,
    "robridge.augment.depth.GaussianBlurAugment": 200,
    "robridge.augment.depth.RandomHolesAugment": 300,
    "robridge.augment.mask.MaskJitterAugment": 400,
}
AUGMENT_DEFAULTS = {
    "warp_mag": 2.0,
    "blur_sigma": 1.5,
    "hole_rate": 0.1,
    "dilate_radius": 2,
    "shift_max": 3,
    "crop_margin": 2,
    "segment_add_delete_p": 0.1,
    "segment_delete_ratio": 0.5,
}

# LOG
LOG_FORMAT = "%(asctime)s [%(name)s] %(levelname)s: %(message)s"
LOG_FILE_APPEND = False
