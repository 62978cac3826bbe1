"""Model bundle persistence: a directory of JSON members plus a manifest.

Every member carries a SHA-256 digest in the manifest and loading refuses
any member whose bytes do not match, naming it. The bundle digest is the
hash over all member digests, so any byte flip anywhere changes it.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path

from litscreen.models.scorers import ForestScorer, LogisticScorer
from litscreen.models.vocab import Vocabulary, VocabularyConfig
from litscreen.preprocess import EnvelopeConfig, PatientPatternConfig
from litscreen.rules import RuleThresholds

BUNDLE_VERSION = "1"

_MEMBERS = ("vocab", "scorer_a", "scorer_b", "patterns")

_MANIFEST_KEYS = (
    "bundle_version",
    "created_utc",
    "vocab_digest",
    "scorer_a_digest",
    "scorer_b_digest",
    "patterns_digest",
    "theta_a",
    "theta_b",
    "envelope_min_tokens",
    "envelope_max_tokens",
    "allowed_languages",
    "training_corpus_digest",
    "seed",
    "bundle_digest",
)


class BundleIntegrityError(ValueError):
    def __init__(self, member: str, message: str):
        self.member = member
        super().__init__(f"{member}: {message}")


@dataclass(frozen=True)
class ModelBundle:
    vocabulary: Vocabulary
    scorer_a: LogisticScorer
    scorer_b: ForestScorer
    envelope: EnvelopeConfig
    thresholds: RuleThresholds
    patterns: PatientPatternConfig
    training_corpus_digest: str
    seed: int
    created_utc: str

    def with_thresholds(self, thresholds: RuleThresholds) -> "ModelBundle":
        return ModelBundle(
            vocabulary=self.vocabulary,
            scorer_a=self.scorer_a,
            scorer_b=self.scorer_b,
            envelope=self.envelope,
            thresholds=thresholds,
            patterns=self.patterns,
            training_corpus_digest=self.training_corpus_digest,
            seed=self.seed,
            created_utc=self.created_utc,
        )

    @cached_property
    def digest(self) -> str:
        members = _member_bytes(self)
        return _combine_digests(
            {name: _sha256(data) for name, data in members.items()}
        )


def _sha256(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def _combine_digests(digests: dict[str, str]) -> str:
    joined = "\n".join(f"{name}:{digests[name]}" for name in sorted(digests))
    return _sha256(joined.encode("ascii"))


def _json_bytes(obj) -> bytes:
    return json.dumps(obj, sort_keys=True, separators=(",", ":")).encode("utf-8")


def _member_bytes(bundle: ModelBundle) -> dict[str, bytes]:
    vocab = bundle.vocabulary
    return {
        "vocab": _json_bytes(
            {
                "entries": vocab.entries,
                "df": vocab.df,
                "config": {
                    "min_df": vocab.config.min_df,
                    "max_size": vocab.config.max_size,
                    "lowercase": vocab.config.lowercase,
                },
            }
        ),
        "scorer_a": _json_bytes(bundle.scorer_a.to_dict()),
        "scorer_b": _json_bytes(bundle.scorer_b.to_dict()),
        "patterns": _json_bytes(
            {
                "person_nouns": list(bundle.patterns.person_nouns),
                "case_report_patterns": list(bundle.patterns.case_report_patterns),
                "person_window_tokens": bundle.patterns.person_window_tokens,
                "errata_title_prefixes": list(bundle.envelope.errata_title_prefixes),
                "errata_abstract_prefixes": list(
                    bundle.envelope.errata_abstract_prefixes
                ),
            }
        ),
    }


def save_bundle(bundle: ModelBundle, path: str | Path) -> str:
    """Write the bundle directory; returns the bundle digest."""
    root = Path(path)
    root.mkdir(parents=True, exist_ok=True)
    members = _member_bytes(bundle)
    digests = {}
    for name, data in members.items():
        (root / f"{name}.json").write_bytes(data)
        digests[name] = _sha256(data)
    bundle_digest = _combine_digests(digests)

    manifest_values = {
        "bundle_version": BUNDLE_VERSION,
        "created_utc": bundle.created_utc,
        "vocab_digest": digests["vocab"],
        "scorer_a_digest": digests["scorer_a"],
        "scorer_b_digest": digests["scorer_b"],
        "patterns_digest": digests["patterns"],
        "theta_a": repr(bundle.thresholds.theta_a),
        "theta_b": repr(bundle.thresholds.theta_b),
        "envelope_min_tokens": str(bundle.envelope.min_tokens),
        "envelope_max_tokens": str(bundle.envelope.max_tokens),
        "allowed_languages": ",".join(bundle.envelope.allowed_languages),
        "training_corpus_digest": bundle.training_corpus_digest,
        "seed": str(bundle.seed),
        "bundle_digest": bundle_digest,
    }
    lines = [f"{key} = {manifest_values[key]}" for key in _MANIFEST_KEYS]
    (root / "MANIFEST").write_text("\n".join(lines) + "\n", encoding="utf-8")
    return bundle_digest


def _parse_manifest(path: Path) -> dict[str, str]:
    if not path.exists():
        raise BundleIntegrityError("manifest", "missing MANIFEST file")
    values: dict[str, str] = {}
    for line in path.read_text(encoding="utf-8").splitlines():
        if not line.strip():
            continue
        key, sep, value = line.partition(" = ")
        if not sep:
            raise BundleIntegrityError("manifest", f"malformed line: {line!r}")
        values[key] = value
    missing = [k for k in _MANIFEST_KEYS if k not in values]
    if missing:
        raise BundleIntegrityError("manifest", f"missing keys: {', '.join(missing)}")
    return values


def load_bundle(path: str | Path) -> ModelBundle:
    """Load and verify a bundle; refuses any member with a digest mismatch."""
    root = Path(path)
    manifest = _parse_manifest(root / "MANIFEST")

    raw: dict[str, bytes] = {}
    digests: dict[str, str] = {}
    for name in _MEMBERS:
        member_path = root / f"{name}.json"
        if not member_path.exists():
            raise BundleIntegrityError(name, "member file missing")
        data = member_path.read_bytes()
        actual = _sha256(data)
        expected = manifest[f"{name}_digest"]
        if actual != expected:
            raise BundleIntegrityError(
                name, f"digest mismatch: manifest {expected[:12]}.., file {actual[:12]}.."
            )
        raw[name] = data
        digests[name] = actual

    bundle_digest = _combine_digests(digests)
    if bundle_digest != manifest["bundle_digest"]:
        raise BundleIntegrityError("manifest", "bundle digest mismatch")

    vocab_data = json.loads(raw["vocab"])
    vocabulary = Vocabulary(
        entries={g: int(i) for g, i in vocab_data["entries"].items()},
        df={g: int(n) for g, n in vocab_data["df"].items()},
        config=VocabularyConfig(**vocab_data["config"]),
    )
    patterns_data = json.loads(raw["patterns"])
    patterns = PatientPatternConfig(
        person_nouns=tuple(patterns_data["person_nouns"]),
        case_report_patterns=tuple(patterns_data["case_report_patterns"]),
        person_window_tokens=patterns_data["person_window_tokens"],
    )
    envelope = EnvelopeConfig(
        min_tokens=int(manifest["envelope_min_tokens"]),
        max_tokens=int(manifest["envelope_max_tokens"]),
        allowed_languages=tuple(
            code for code in manifest["allowed_languages"].split(",") if code
        ),
        errata_title_prefixes=tuple(patterns_data["errata_title_prefixes"]),
        errata_abstract_prefixes=tuple(patterns_data["errata_abstract_prefixes"]),
    )
    return ModelBundle(
        vocabulary=vocabulary,
        scorer_a=LogisticScorer.from_dict(json.loads(raw["scorer_a"])),
        scorer_b=ForestScorer.from_dict(json.loads(raw["scorer_b"])),
        envelope=envelope,
        thresholds=RuleThresholds(
            theta_a=float(manifest["theta_a"]), theta_b=float(manifest["theta_b"])
        ),
        patterns=patterns,
        training_corpus_digest=manifest["training_corpus_digest"],
        seed=int(manifest["seed"]),
        created_utc=manifest["created_utc"],
    )
