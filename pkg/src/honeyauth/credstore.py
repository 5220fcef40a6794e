"""KDF profiles, sweetword records and the JSON-lines credential store.

A stored record never says which digest belongs to the real password: that
index lives only in the honeychecker.  All k sweetwords of an account share
one salt, so a login costs a single KDF evaluation followed by k digest
comparisons.
"""

from __future__ import annotations

import base64
import hashlib
import hmac
import json
import os
import re
import tempfile
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator, Mapping

import argon2.low_level
import bcrypt

from .errors import ConfigError, EnrollError, GenerationError, ParseError

UID_PATTERN = re.compile(r"[A-Za-z0-9_.\-]{1,64}")
SALT_BYTES = 16
DIGEST_BYTES = 32
RECORD_KEYS = ("uid", "salt", "kdf", "digests")

_HEX = re.compile(r"(?:[0-9a-f]{2})+")


@dataclass(frozen=True)
class KdfProfile:
    """Hashing algorithm identity plus cost parameters.

    ``memory_cost`` is in bytes.  ``time_cost`` means passes for argon2id,
    the log2 work factor for bcrypt, N for scrypt and iterations for
    pbkdf2.  ``bench_rate`` is attacker guesses/s on reference hardware.
    """

    id: str
    algorithm: str
    memory_cost: int
    time_cost: int
    parallelism: int
    bench_rate: float
    block_size: int = 8  # scrypt r; ignored elsewhere

    def __post_init__(self):
        if self.algorithm not in _HASHERS:
            raise ConfigError(f"unknown KDF algorithm {self.algorithm!r}")
        if not self.bench_rate > 0:
            raise ConfigError(f"{self.id}: bench_rate must be > 0")
        if self.memory_cost < 0:
            raise ConfigError(f"{self.id}: memory_cost must be >= 0")
        if self.time_cost < 1:
            raise ConfigError(f"{self.id}: time_cost must be >= 1")
        if self.parallelism < 1:
            raise ConfigError(f"{self.id}: parallelism must be >= 1")

    def describe(self):
        mib = self.memory_cost / 2**20
        if self.algorithm == "argon2id":
            return f"Argon2id (m={mib:g}MB, t={self.time_cost})"
        if self.algorithm == "bcrypt":
            return f"bcrypt (cost={self.time_cost})"
        if self.algorithm == "scrypt":
            n = self.time_cost.bit_length() - 1
            return f"scrypt (N=2^{n}, r={self.block_size})"
        if self.algorithm == "pbkdf2-sha256":
            return f"PBKDF2-SHA256 (i={self.time_cost})"
        return self.id


def _argon2id(password, p, salt):
    return argon2.low_level.hash_secret_raw(
        secret=password,
        salt=salt,
        time_cost=p.time_cost,
        memory_cost=max(8 * p.parallelism, p.memory_cost // 1024),
        parallelism=p.parallelism,
        hash_len=DIGEST_BYTES,
        type=argon2.low_level.Type.ID,
    )


_STD_B64 = b"ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/"
_BCRYPT_B64 = b"./ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789"
_TO_BCRYPT = bytes.maketrans(_STD_B64, _BCRYPT_B64)
_FROM_BCRYPT = bytes.maketrans(_BCRYPT_B64, _STD_B64)


def _bcrypt(password, p, salt):
    if len(password) > 72:
        raise ConfigError("bcrypt accepts at most 72 password bytes")
    encoded_salt = base64.b64encode(salt[:16]).rstrip(b"=").translate(_TO_BCRYPT)
    setting = b"$2b$%02d$" % p.time_cost + encoded_salt
    out = bcrypt.hashpw(password, setting)
    # last 31 chars carry the 23-byte hash in bcrypt's base64 alphabet
    return base64.b64decode(out[-31:].translate(_FROM_BCRYPT) + b"=")


def _scrypt(password, p, salt):
    maxmem = 128 * p.block_size * (p.time_cost + p.parallelism) * 2 + 2**20
    return hashlib.scrypt(
        password, salt=salt, n=p.time_cost, r=p.block_size, p=p.parallelism,
        maxmem=maxmem, dklen=DIGEST_BYTES,
    )


def _pbkdf2(password, p, salt):
    return hashlib.pbkdf2_hmac("sha256", password, salt, p.time_cost, DIGEST_BYTES)


def _test_kdf(password, p, salt):
    return hmac.new(salt, password, hashlib.sha256).digest()


_HASHERS = {
    "argon2id": _argon2id,
    "bcrypt": _bcrypt,
    "scrypt": _scrypt,
    "pbkdf2-sha256": _pbkdf2,
    "test-kdf": _test_kdf,
}

# Rates for argon2id/bcrypt/scrypt are the published benchmark figures used
# in the crack-time tables.  The pbkdf2 rate is scaled from a GPU figure at
# 999 iterations; test-kdf is a placeholder for the desk-scale profile.
DEFAULT_PROFILES: dict[str, KdfProfile] = {
    p.id: p
    for p in (
        KdfProfile("argon2id", "argon2id", 512 * 2**20, 3, 1, 60.0),
        KdfProfile("bcrypt", "bcrypt", 4096, 12, 1, 200_000.0),
        KdfProfile("scrypt", "scrypt", 128 * 8 * 2**15, 2**15, 1, 4_500.0),
        KdfProfile("pbkdf2-sha256", "pbkdf2-sha256", 0, 600_000, 1, 15_000.0),
        KdfProfile("test-kdf", "test-kdf", 0, 1, 1, 1e9),
    )
}

TABLE_PROFILES = ("argon2id", "bcrypt", "scrypt")


def get_profile(profile, profiles: Mapping[str, KdfProfile] | None = None) -> KdfProfile:
    if isinstance(profile, KdfProfile):
        return profile
    registry = DEFAULT_PROFILES if profiles is None else profiles
    try:
        return registry[profile]
    except KeyError:
        raise ConfigError(f"unknown KDF profile {profile!r}") from None


def kdf_hash(password: str, profile, salt: bytes, profiles=None) -> bytes:
    """Hash ``password`` with ``profile`` (a KdfProfile or registry id)."""
    prof = get_profile(profile, profiles)
    if not isinstance(password, str) or not password:
        raise ValueError("password must be a non-empty string")
    if not isinstance(salt, (bytes, bytearray)) or len(salt) < SALT_BYTES:
        raise ValueError(f"salt must be at least {SALT_BYTES} bytes")
    return _HASHERS[prof.algorithm](password.encode("utf-8"), prof, bytes(salt))


def derive_salt(seed: int, uid: str) -> bytes:
    """Deterministic per-account salt for reproducible experiment runs."""
    return hashlib.blake2b(f"{seed}:{uid}".encode(), digest_size=SALT_BYTES,
                           person=b"honeyauth-salt").digest()


@dataclass(frozen=True)
class SweetwordSet:
    uid: str
    salt: bytes
    kdf: str
    digests: tuple[bytes, ...]

    def __post_init__(self):
        if not UID_PATTERN.fullmatch(self.uid):
            raise ValueError(f"invalid uid {self.uid!r}")
        if len(self.salt) < SALT_BYTES:
            raise ValueError("salt shorter than 16 bytes")
        if len(self.digests) < 2:
            raise ValueError("a sweetword set needs k >= 2 digests")
        if len(set(self.digests)) != len(self.digests):
            raise ValueError("digests are not distinct")

    @property
    def k(self):
        return len(self.digests)

    def to_json(self) -> str:
        obj = {
            "uid": self.uid,
            "salt": self.salt.hex(),
            "kdf": self.kdf,
            "digests": [d.hex() for d in self.digests],
        }
        return json.dumps(obj, separators=(",", ":"))

    @classmethod
    def from_obj(cls, obj) -> "SweetwordSet":
        if not isinstance(obj, dict) or sorted(obj) != sorted(RECORD_KEYS):
            raise ValueError(f"record keys must be exactly {list(RECORD_KEYS)}")
        uid, salt, kdf, digests = (obj[key] for key in RECORD_KEYS)
        if not isinstance(uid, str) or not isinstance(kdf, str):
            raise ValueError("uid and kdf must be strings")
        if not isinstance(salt, str) or not _HEX.fullmatch(salt):
            raise ValueError("salt must be lowercase hex")
        if not isinstance(digests, list) or not all(
            isinstance(d, str) and _HEX.fullmatch(d) for d in digests
        ):
            raise ValueError("digests must be a list of lowercase hex strings")
        return cls(uid, bytes.fromhex(salt), kdf, tuple(bytes.fromhex(d) for d in digests))


@dataclass
class CredentialStore:
    records: dict[str, SweetwordSet] = field(default_factory=dict)

    def __len__(self):
        return len(self.records)

    def __contains__(self, uid):
        return uid in self.records

    def __iter__(self) -> Iterator[SweetwordSet]:
        for uid in sorted(self.records):
            yield self.records[uid]

    def get(self, uid) -> SweetwordSet | None:
        return self.records.get(uid)

    def dumps(self) -> str:
        return "".join(rec.to_json() + "\n" for rec in self)


def enroll(uid, real_password, sweetwords, true_index, profile, store,
           salt=None, profiles=None) -> CredentialStore:
    """Hash ``sweetwords`` (in order) into a new record of ``store``.

    ``true_index`` is only checked, never stored; the caller forwards it to
    the honeychecker.
    """
    prof = get_profile(profile, profiles)
    if uid in store:
        raise EnrollError(f"uid {uid!r} already enrolled")
    if not UID_PATTERN.fullmatch(uid):
        raise EnrollError(f"invalid uid {uid!r}")
    sweetwords = list(sweetwords)
    if len(sweetwords) < 2:
        raise EnrollError("need at least two sweetwords")
    if not 0 <= true_index < len(sweetwords):
        raise EnrollError(f"true_index {true_index} outside [0, {len(sweetwords)})")
    if sweetwords[true_index] != real_password:
        raise EnrollError(f"sweetwords[{true_index}] is not the real password")
    if len(set(sweetwords)) != len(sweetwords):
        raise GenerationError("duplicate sweetwords", constraint="distinct")
    if salt is None:
        salt = os.urandom(SALT_BYTES)
    digests = tuple(kdf_hash(sw, prof, salt) for sw in sweetwords)
    try:
        record = SweetwordSet(uid, bytes(salt), prof.id, digests)
    except ValueError as exc:
        raise EnrollError(str(exc)) from None
    store.records[uid] = record
    return store


def parse_store(text: str) -> CredentialStore:
    store = CredentialStore()
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            record = SweetwordSet.from_obj(json.loads(line))
        except (ValueError, TypeError) as exc:
            raise ParseError(str(exc), line=lineno) from None
        if record.uid in store.records:
            raise ParseError(f"duplicate uid {record.uid!r}", line=lineno)
        store.records[record.uid] = record
    return store


def load_store(path) -> CredentialStore:
    return parse_store(Path(path).read_text(encoding="utf-8"))


def save_store(store: CredentialStore, path) -> None:
    """Write records sorted by uid; the replace is atomic."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or ".", prefix=".store-")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(store.dumps())
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
