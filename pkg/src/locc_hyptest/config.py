"""Sweep configuration: INI files, shipped presets and flag overrides."""

from __future__ import annotations

import configparser
from dataclasses import dataclass, field, replace
from fractions import Fraction
from importlib import resources
from pathlib import Path
from typing import Optional

import numpy as np

from .core import MeasurementClass, SchmidtSpectrum, TestInstance, tensor_power, validate_instance
from .tradeoff import ALL_CLASSES

PRESETS = ("fig1", "fig2", "fig3", "fig4")


class ConfigError(ValueError):
    pass


def parse_number(text: str) -> float:
    """Float or fraction such as '3/4'."""
    text = text.strip()
    try:
        if "/" in text:
            return float(Fraction(text))
        return float(text)
    except (ValueError, ZeroDivisionError):
        raise ValueError(f"not a number: {text!r}") from None


def parse_list(text: str) -> list:
    return [parse_number(t) for t in text.replace(";", ",").split(",") if t.strip()]


def parse_grid(text: str) -> list:
    """'A:B:N' (N evenly spaced points, N >= 2) or an explicit list."""
    text = text.strip()
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ValueError(f"grid must be START:STOP:COUNT, got {text!r}")
        start, stop = parse_number(parts[0]), parse_number(parts[1])
        try:
            count = int(parts[2])
        except ValueError:
            raise ValueError(f"grid count must be an integer, got {parts[2]!r}") from None
        if count < 2:
            raise ValueError("grid count must be >= 2")
        return [float(x) for x in np.linspace(start, stop, count)]
    return parse_list(text)


def parse_classes(text: str) -> list:
    return [MeasurementClass.parse(t) for t in text.split(",") if t.strip()]


@dataclass
class SweepConfig:
    lambdas: Optional[list] = None
    dims: Optional[tuple] = None
    tensor_power: int = 1
    alphas: list = field(default_factory=lambda: [float(x) for x in np.linspace(0, 1, 101)])
    classes: list = field(default_factory=lambda: list(ALL_CLASSES))
    breakpoints: bool = False
    vary: str = "alpha"  # or "lambda"
    lambda_grid: list = field(default_factory=list)
    fixed_alpha: float = 0.35
    title: str = ""
    source: str = "<defaults>"

    def instance(self) -> TestInstance:
        if self.lambdas is None:
            raise ConfigError(f"{self.source}: no spectrum given (use --lambda or [instance] lambda)")
        spec = SchmidtSpectrum(self.lambdas)
        d = spec.d
        d_a, d_b = self.dims if self.dims else (d, d)
        base = validate_instance(TestInstance(d_a, d_b, spec))
        return tensor_power(base, self.tensor_power) if self.tensor_power > 1 else base

    def lambda_instances(self) -> list:
        """(lambda, instance) pairs for a lambda sweep; spectrum (1 - lambda, lambda)."""
        d_a, d_b = self.dims if self.dims else (2, 2)
        out = []
        for lam in self.lambda_grid:
            if not (0 <= lam <= 0.5):
                raise ConfigError(f"{self.source}: lambda={lam} outside [0, 0.5]")
            inst = validate_instance(TestInstance(d_a, d_b, SchmidtSpectrum((1.0 - lam, lam))))
            out.append((lam, inst))
        return out

    def validate(self) -> "SweepConfig":
        alphas = [self.fixed_alpha] if self.vary == "lambda" else self.alphas
        for a in alphas:
            if not (0 <= a <= 1):
                raise ConfigError(f"{self.source}: alpha={a} outside [0, 1]")
        if self.vary not in ("alpha", "lambda"):
            raise ConfigError(f"{self.source}: vary must be 'alpha' or 'lambda'")
        return self


def _line_of(text: str, section: str, key: str) -> Optional[int]:
    current = None
    for no, line in enumerate(text.splitlines(), 1):
        s = line.strip()
        if s.startswith("[") and s.endswith("]"):
            current = s[1:-1].strip()
        elif current == section and "=" in s and s.split("=", 1)[0].strip() == key:
            return no
    return None


def parse_config_text(text: str, source: str = "<config>") -> SweepConfig:
    cp = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    try:
        cp.read_string(text, source=source)
    except configparser.Error as exc:
        raise ConfigError(f"{source}: {exc}") from None
    cfg = SweepConfig(source=source)

    def field_value(section, key, parser):
        raw = cp.get(section, key)
        try:
            return parser(raw)
        except ValueError as exc:
            line = _line_of(text, section, key)
            where = f"{source}:{line}" if line else source
            raise ConfigError(f"{where}: [{section}] {key}: {exc}") from None

    known = {
        "instance": {"lambda", "dims", "tensor_power"},
        "sweep": {"alphas", "classes", "breakpoints", "vary", "lambdas", "alpha"},
        "plot": {"title"},
    }
    for section in cp.sections():
        if section not in known:
            raise ConfigError(f"{source}: unknown section [{section}]")
        for key in cp[section]:
            if key not in known[section]:
                line = _line_of(text, section, key)
                where = f"{source}:{line}" if line else source
                raise ConfigError(f"{where}: [{section}] unknown key {key!r}")

    def dims(raw):
        vals = [int(v) for v in raw.split(",")]
        if len(vals) != 2 or min(vals) < 1:
            raise ValueError("dims must be two positive integers DA, DB")
        return tuple(vals)

    def boolean(raw):
        low = raw.strip().lower()
        if low in ("1", "yes", "true", "on"):
            return True
        if low in ("0", "no", "false", "off"):
            return False
        raise ValueError(f"not a boolean: {raw!r}")

    if cp.has_section("instance"):
        if cp.has_option("instance", "lambda"):
            cfg.lambdas = field_value("instance", "lambda", parse_list)
        if cp.has_option("instance", "dims"):
            cfg.dims = field_value("instance", "dims", dims)
        if cp.has_option("instance", "tensor_power"):
            cfg.tensor_power = field_value("instance", "tensor_power", int)
    if cp.has_section("sweep"):
        s = "sweep"
        if cp.has_option(s, "alphas"):
            cfg.alphas = field_value(s, "alphas", parse_grid)
        if cp.has_option(s, "classes"):
            cfg.classes = field_value(s, "classes", parse_classes)
        if cp.has_option(s, "breakpoints"):
            cfg.breakpoints = field_value(s, "breakpoints", boolean)
        if cp.has_option(s, "vary"):
            cfg.vary = cp.get(s, "vary").strip()
        if cp.has_option(s, "lambdas"):
            cfg.lambda_grid = field_value(s, "lambdas", parse_grid)
        if cp.has_option(s, "alpha"):
            cfg.fixed_alpha = field_value(s, "alpha", parse_number)
    if cp.has_option("plot", "title"):
        cfg.title = cp.get("plot", "title")
    return cfg.validate()


def load_config(path) -> SweepConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    return parse_config_text(text, str(path))


def load_preset(name: str) -> SweepConfig:
    if name not in PRESETS:
        raise ConfigError(f"unknown preset {name!r} (expected one of {', '.join(PRESETS)})")
    text = resources.files("locc_hyptest.presets").joinpath(f"{name}.ini").read_text(encoding="utf-8")
    return parse_config_text(text, f"preset:{name}")


def with_overrides(cfg: SweepConfig, **kw) -> SweepConfig:
    kw = {k: v for k, v in kw.items() if v is not None}
    return replace(cfg, **kw).validate()
