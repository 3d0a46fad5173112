"""Loading the crystal dispersion database (YAML)."""

from __future__ import annotations

import hashlib
import os
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import yaml

from .dispersion import SellmeierModel
from .errors import CrystalNotFoundError, DatabaseError, GvmSpdcError
from .gvm import branch_minimum
from .phasematch import CrystalSpec

ENV_VAR = "GVMSPDC_DB"
SCHEMA_VERSION = 1

_MODEL_KEYS = ("form_id", "coefficients", "validity_min", "validity_max", "source")


@dataclass
class CrystalDatabase:
    schema_version: int
    crystals: dict = field(default_factory=dict)
    checksum: str = ""
    path: str = ""

    @property
    def names(self):
        return list(self.crystals)

    def get(self, name: str) -> CrystalSpec:
        try:
            return self.crystals[name]
        except KeyError:
            raise CrystalNotFoundError(
                f"crystal not found: {name!r}; available: {', '.join(self.names)}"
            ) from None


def default_path() -> Path:
    env = os.environ.get(ENV_VAR)
    if env:
        return Path(env)
    return Path(str(resources.files("gvmspdc") / "data" / "crystals.yaml"))


def parse(text: str, checksum: str = "", path: str = "") -> CrystalDatabase:
    try:
        raw = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise DatabaseError(f"cannot parse crystal database: {exc}") from exc
    if not isinstance(raw, dict):
        raise DatabaseError("crystal database must be a mapping")
    version = raw.get("schema_version")
    if version != SCHEMA_VERSION:
        raise DatabaseError(f"unsupported schema_version {version!r}")

    models = {}
    for rec in raw.get("models") or []:
        missing = [k for k in ("id",) + _MODEL_KEYS if k not in rec]
        if missing:
            raise DatabaseError(f"model record {rec.get('id')!r} lacks {missing}")
        if rec["id"] in models:
            raise DatabaseError(f"duplicate model id {rec['id']!r}")
        try:
            models[rec["id"]] = SellmeierModel(
                form_id=rec["form_id"],
                coefficients=tuple(rec["coefficients"]),
                validity_min=float(rec["validity_min"]),
                validity_max=float(rec["validity_max"]),
                source=str(rec["source"]),
                label=str(rec.get("label", rec["id"])),
            )
        except ValueError as exc:
            raise DatabaseError(f"model {rec['id']!r}: {exc}") from exc

    crystals = {}
    for rec in raw.get("crystals") or []:
        name = rec.get("name")
        if name in crystals:
            raise DatabaseError(f"duplicate crystal name {name!r}")
        try:
            roles = {role: models[rec[role]] for role in ("pump", "signal", "idler")}
        except KeyError as exc:
            raise DatabaseError(f"crystal {name!r}: unknown or missing model {exc}") from None
        try:
            crystals[name] = CrystalSpec(
                name=name,
                pump_model=roles["pump"],
                signal_model=roles["signal"],
                idler_model=roles["idler"],
                absorption_edge=float(rec["absorption_edge_um"]),
            )
        except (KeyError, ValueError) as exc:
            raise DatabaseError(f"crystal {name!r}: {exc}") from exc
        _check_edge(crystals[name])
    return CrystalDatabase(version, crystals, checksum, path)


def _check_edge(crystal):
    # GVM needs idlers between the group-index minimum and the absorption edge
    try:
        lam_min = branch_minimum(crystal.idler_model)
    except GvmSpdcError as exc:
        raise DatabaseError(f"crystal {crystal.name!r}: {exc}") from exc
    if not crystal.absorption_edge > lam_min:
        raise DatabaseError(
            f"crystal {crystal.name!r}: absorption edge {crystal.absorption_edge} um "
            f"is not above the idler group-index minimum {lam_min:.4f} um"
        )


def load(path=None) -> CrystalDatabase:
    path = Path(path) if path is not None else default_path()
    try:
        data = path.read_bytes()
    except OSError as exc:
        raise DatabaseError(f"cannot read crystal database {path}: {exc}") from exc
    return parse(data.decode("utf-8"), hashlib.sha256(data).hexdigest(), str(path))
