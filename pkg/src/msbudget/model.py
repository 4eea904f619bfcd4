"""Annotated application model: microservices, their versions, and the JSON
description format they are loaded from.

The workflow is a linear chain: users enter the first microservice and a
fraction ``q`` of them moves on to the next one.
"""
from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Iterator, Mapping, Sequence

Configuration = tuple[int, ...]

DEFAULT_WEIGHT = 0.5

_APP_FIELDS = {"name", "alpha", "beta", "microservices"}
_APP_REQUIRED = {"name", "microservices"}
_MS_FIELDS = {"name", "optional", "versions"}
_VERSION_FIELDS = {"name", "instance_type", "ed_watts", "q", "uc", "qoe", "rev"}
_VERSION_REQUIRED = {"name", "ed_watts", "q", "qoe", "rev"}


class ApplicationError(ValueError):
    """Base class for problems with an application description."""


class SchemaError(ApplicationError):
    """A field is missing, unknown, or has the wrong type."""


class ValidationError(ApplicationError):
    """The description is well-formed but breaks a model invariant."""


@dataclass(frozen=True)
class VersionSpec:
    """One deployable variant of a microservice.

    ``ed_watts`` is the average draw of a single instance, so one
    instance-hour costs ``ed_watts`` Wh. A version with ``ed_watts == 0`` is
    the "Off" variant of an optional microservice.
    """

    name: str
    ed_watts: float
    q: float
    qoe: float
    rev: float
    uc: int | None = None
    instance_type: str | None = None

    @property
    def is_off(self) -> bool:
        return self.ed_watts == 0

    def _check(self, where: str) -> None:
        if not 0.0 <= self.q <= 1.0:
            raise ValidationError(f"{where}: q must lie in [0, 1], got {self.q}")
        if not 0.0 <= self.qoe <= 1.0:
            raise ValidationError(f"{where}: qoe must lie in [0, 1], got {self.qoe}")
        if not (math.isfinite(self.ed_watts) and self.ed_watts >= 0):
            raise ValidationError(f"{where}: ed_watts must be finite and >= 0, got {self.ed_watts}")
        if not (math.isfinite(self.rev) and self.rev >= 0):
            raise ValidationError(f"{where}: rev must be >= 0, got {self.rev}")
        if self.is_off:
            if self.qoe != 0 or self.rev != 0:
                raise ValidationError(f"{where}: an Off version (ed_watts = 0) must have qoe = 0 and rev = 0")
            if self.uc is not None or self.instance_type is not None:
                raise ValidationError(f"{where}: an Off version (ed_watts = 0) takes no uc or instance_type")
        elif self.uc is None or self.uc <= 0:
            raise ValidationError(f"{where}: uc must be a positive integer, got {self.uc}")


@dataclass(frozen=True)
class Microservice:
    name: str
    optional: bool
    versions: tuple[VersionSpec, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "versions", tuple(self.versions))

    def _check(self) -> None:
        where = f"microservice {self.name!r}"
        if not self.versions:
            raise ValidationError(f"{where}: needs at least one version")
        names = [v.name for v in self.versions]
        if len(set(names)) != len(names):
            raise ValidationError(f"{where}: duplicate version names {names}")
        for v in self.versions:
            v._check(f"{where}, version {v.name!r}")
        n_off = sum(v.is_off for v in self.versions)
        if self.optional and n_off != 1:
            raise ValidationError(f"{where}: an optional microservice needs exactly one Off version, found {n_off}")
        if not self.optional and n_off:
            raise ValidationError(f"{where}: a mandatory microservice cannot have an Off version")

    def version_index(self, name: str) -> int:
        for i, v in enumerate(self.versions):
            if v.name == name:
                return i
        raise ValidationError(f"microservice {self.name!r} has no version {name!r}")


@dataclass(frozen=True)
class ApplicationModel:
    """A validated application. Immutable and hashable, so derived tables can
    be cached per model."""

    name: str
    microservices: tuple[Microservice, ...]
    alpha: float = DEFAULT_WEIGHT
    beta: float = DEFAULT_WEIGHT
    _n_configs: int = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "microservices", tuple(self.microservices))
        if not self.microservices:
            raise ValidationError(f"application {self.name!r}: needs at least one microservice")
        names = [ms.name for ms in self.microservices]
        if len(set(names)) != len(names):
            raise ValidationError(f"application {self.name!r}: duplicate microservice names {names}")
        for ms in self.microservices:
            ms._check()
        if self.alpha < 0 or self.beta < 0 or not self.alpha + self.beta > 0:
            raise ValidationError(
                f"application {self.name!r}: alpha and beta must be >= 0 with a positive sum, "
                f"got alpha={self.alpha}, beta={self.beta}"
            )
        object.__setattr__(self, "_n_configs", math.prod(len(ms.versions) for ms in self.microservices))

    @property
    def n_microservices(self) -> int:
        return len(self.microservices)

    @property
    def n_configs(self) -> int:
        return self._n_configs

    def with_weights(self, alpha: float | None = None, beta: float | None = None) -> ApplicationModel:
        return replace(
            self,
            alpha=self.alpha if alpha is None else float(alpha),
            beta=self.beta if beta is None else float(beta),
        )

    def check_config(self, config: Sequence[int]) -> Configuration:
        if len(config) != self.n_microservices:
            raise ValueError(f"configuration has {len(config)} entries, application has {self.n_microservices} microservices")
        for ms, idx in zip(self.microservices, config):
            if not 0 <= idx < len(ms.versions):
                raise ValueError(f"version index {idx} out of range for microservice {ms.name!r}")
        return tuple(int(i) for i in config)

    def config_names(self, config: Sequence[int]) -> tuple[str, ...]:
        return tuple(ms.versions[i].name for ms, i in zip(self.microservices, config))

    def config_from_names(self, names: Sequence[str]) -> Configuration:
        if len(names) != self.n_microservices:
            raise ValidationError(
                f"configuration {list(names)} has {len(names)} entries, "
                f"application has {self.n_microservices} microservices"
            )
        return tuple(ms.version_index(n) for ms, n in zip(self.microservices, names))


def config_space(app: ApplicationModel) -> Iterator[Configuration]:
    """Every configuration of ``app`` in lexicographic order of version indices."""
    return itertools.product(*(range(len(ms.versions)) for ms in app.microservices))


# --- JSON description ---------------------------------------------------------

_KIND_NAMES = {str: "a string", bool: "a boolean", int: "an integer", float: "a number", list: "a list"}


def _expect(obj: Mapping, key: str, kinds: tuple[type, ...], where: str) -> Any:
    value = obj[key]
    # bool is an int subclass; never accept it for numeric fields
    if not isinstance(value, kinds) or (isinstance(value, bool) and bool not in kinds):
        raise SchemaError(f"{where}: field {key!r} must be {_KIND_NAMES[kinds[-1]]}, got {value!r}")
    return value


def _check_keys(obj: Any, allowed: set[str], required: set[str], where: str) -> None:
    if not isinstance(obj, Mapping):
        raise SchemaError(f"{where}: expected a JSON object, got {type(obj).__name__}")
    unknown = sorted(set(obj) - allowed)
    if unknown:
        raise SchemaError(f"{where}: unknown field(s) {unknown}")
    missing = sorted(required - set(obj))
    if missing:
        raise SchemaError(f"{where}: missing field(s) {missing}")


def _parse_version(doc: Any, where: str) -> VersionSpec:
    _check_keys(doc, _VERSION_FIELDS, _VERSION_REQUIRED, where)
    name = _expect(doc, "name", (str,), where)
    where = f"{where} {name!r}"
    num = (int, float)
    uc = doc.get("uc")
    if uc is not None:
        uc = _expect(doc, "uc", (int,), where)
    instance_type = doc.get("instance_type")
    if instance_type is not None:
        instance_type = _expect(doc, "instance_type", (str,), where)
    return VersionSpec(
        name=name,
        ed_watts=float(_expect(doc, "ed_watts", num, where)),
        q=float(_expect(doc, "q", num, where)),
        qoe=float(_expect(doc, "qoe", num, where)),
        rev=float(_expect(doc, "rev", num, where)),
        uc=uc,
        instance_type=instance_type,
    )


def _parse_microservice(doc: Any, index: int) -> Microservice:
    where = f"microservices[{index}]"
    _check_keys(doc, _MS_FIELDS, _MS_FIELDS, where)
    name = _expect(doc, "name", (str,), where)
    where = f"microservice {name!r}"
    optional = _expect(doc, "optional", (bool,), where)
    versions = _expect(doc, "versions", (list,), where)
    return Microservice(
        name=name,
        optional=optional,
        versions=tuple(_parse_version(v, f"{where}, version") for v in versions),
    )


def parse_application(document: str | bytes | Mapping[str, Any]) -> ApplicationModel:
    """Build a validated :class:`ApplicationModel` from JSON text or an
    already-decoded mapping.

    Raises :class:`SchemaError` for structural problems and
    :class:`ValidationError` for invariant violations; messages name the
    offending microservice and version.
    """
    if isinstance(document, (str, bytes)):
        try:
            document = json.loads(document)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"application document is not valid JSON: {exc}") from None
    _check_keys(document, _APP_FIELDS, _APP_REQUIRED, "application")
    name = _expect(document, "name", (str,), "application")
    where = f"application {name!r}"
    ms_docs = _expect(document, "microservices", (list,), where)
    alpha = float(_expect(document, "alpha", (int, float), where)) if "alpha" in document else DEFAULT_WEIGHT
    beta = float(_expect(document, "beta", (int, float), where)) if "beta" in document else DEFAULT_WEIGHT
    return ApplicationModel(
        name=name,
        microservices=tuple(_parse_microservice(m, i) for i, m in enumerate(ms_docs)),
        alpha=alpha,
        beta=beta,
    )


def load_application(path: str | Path) -> ApplicationModel:
    return parse_application(Path(path).read_text(encoding="utf-8"))


def application_to_document(app: ApplicationModel) -> dict[str, Any]:
    """Inverse of :func:`parse_application`."""
    def version_doc(v: VersionSpec) -> dict[str, Any]:
        d: dict[str, Any] = {"name": v.name}
        if v.instance_type is not None:
            d["instance_type"] = v.instance_type
        d["ed_watts"] = v.ed_watts
        d["q"] = v.q
        if v.uc is not None:
            d["uc"] = v.uc
        d["qoe"] = v.qoe
        d["rev"] = v.rev
        return d

    return {
        "name": app.name,
        "alpha": app.alpha,
        "beta": app.beta,
        "microservices": [
            {"name": ms.name, "optional": ms.optional, "versions": [version_doc(v) for v in ms.versions]}
            for ms in app.microservices
        ],
    }
