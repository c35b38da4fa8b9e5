"""Configuration constants for hmamba-capt."""

# Application constants
APP_NAME = "hmamba"
APP_VERSION = "1.0"
APP_TITLE = "HMamba pronunciation assessment toolkit"

# Version stamped into every artifact (corpus, features, checkpoints, reports, histories)
FORMAT_VERSION = 1

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"

# Phone inventory
SILENCE = "SIL"
DELETION = "[DEL]"
UNKNOWN = "[unk]"

CMU_PHONES = (
    "AA", "AE", "AH", "AO", "AW", "AY", "B", "CH", "D", "DH",
    "EH", "ER", "EY", "F", "G", "HH", "IH", "IY", "JH", "K",
    "L", "M", "N", "NG", "OW", "OY", "P", "R", "S", "SH",
    "T", "TH", "UH", "UW", "V", "W", "Y", "Z", "ZH",
)  # fmt: skip

# Learner-specific realizations added to the annotation set; corpora may declare their own
L2_PHONES = ("AX", "IX", "UX", "DX", "EL", "EN")

# Relative position tokens
RELATIVE_TOKENS = ("B", "I", "E", "S", "LS", "SS")
LONG_SILENCE_THRESHOLD = 0.495

# Aspects per granularity
PHONE_ASPECTS = ("accuracy",)
WORD_ASPECTS = ("accuracy", "stress", "total")
UTTERANCE_ASPECTS = ("accuracy", "completeness", "fluency", "prosody", "total")
GRANULARITIES = {
    "phone": PHONE_ASPECTS,
    "word": WORD_ASPECTS,
    "utterance": UTTERANCE_ASPECTS,
}

# Declared raw score ranges (data-declared; these are generator defaults)
DEFAULT_SCORE_RANGES = {
    "phone.accuracy": [0.0, 2.0],
    **{f"word.{aspect}": [0.0, 10.0] for aspect in WORD_ASPECTS},
    **{f"utterance.{aspect}": [0.0, 10.0] for aspect in UTTERANCE_ASPECTS},
}

# Feature providers: (name, dim, is_ssl) in manifest order
FEATURE_PROVIDERS = (
    ("gop", 8, False),
    ("duration", 1, False),
    ("energy", 2, False),
    ("w2v", 16, True),
    ("hubert", 16, True),
    ("wavlm", 16, True),
)
SYNTHETIC_PREFIX = "synthetic:"
SSL_DROPOUT_RATE = 0.1

# Numerics
LAYER_NORM_EPS = 1e-5
PROBABILITY_FLOOR = 1e-12
EMBEDDING_INIT_STD = 0.02

# File names
CORPUS_FILE = "corpus_{split}.jsonl"
FEATURE_FILE = "features_{split}.jsonl"
SAMPLE_UTTERANCE_FILE = "sample_utterance.json"
HISTORY_FILE = "history.jsonl"
FINAL_CHECKPOINT = "final.ckpt"
BEST_CHECKPOINT = "best.ckpt"
REPORT_FILE = "report.json"
CURVES_CSV = "curves.csv"
CHECKPOINT_EXTENSIONS = [".ckpt"]

# CSV layouts
REPORT_CSV_TITLE = "report.csv"
CURVE_CSV_HEADERS = [
    "run",
    "epoch",
    "step",
    "train_loss",
    "per",
    "phone_pcc",
    "word_total_pcc",
    "utterance_total_pcc",
]
SWEEP_CSV_HEADERS = ["alpha", "precision", "recall", "f1", "per"]
