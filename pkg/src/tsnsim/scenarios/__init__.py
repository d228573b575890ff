"""Bundled scenario library.

Every scenario is a JSON config under ``data/``, generated from the layouts
in ``single_link`` and ``network`` (``python -m tsnsim.scenarios`` rewrites
them). Each one also carries machine-checkable expectations over its trace.
"""
from __future__ import annotations

import json
import os
from dataclasses import dataclass, field

from ..config import config_from_dict, load_config
from . import expected, network, single_link

DATA_DIR = os.path.join(os.path.dirname(__file__), "data")


@dataclass
class NetworkScenario:
    name: str
    config: object
    expected: list = field(default_factory=list)  # [(description, check(log, config) -> bool)]

    def failures(self, log):
        return [desc for desc, check in self.expected if not check(log, self.config)]


def documents():
    docs = dict(single_link.documents())
    docs.update(network.documents())
    return docs


def names():
    return sorted(os.path.splitext(f)[0] for f in os.listdir(DATA_DIR) if f.endswith(".json"))


def path(name):
    p = os.path.join(DATA_DIR, f"{name}.json")
    if not os.path.exists(p):
        raise KeyError(f"no bundled scenario {name!r}; available: {', '.join(names())}")
    return p


def resolve(arg):
    """Map ``scenarios/<name>`` (or a bare bundled name) to its file; other paths pass through."""
    if os.path.exists(arg):
        return arg
    name = arg
    if name.startswith("scenarios/"):
        name = name[len("scenarios/"):]
    name = name.removesuffix(".json")
    if "/" not in name and os.path.exists(os.path.join(DATA_DIR, f"{name}.json")):
        return os.path.join(DATA_DIR, f"{name}.json")
    return arg


def load(name):
    return NetworkScenario(name, load_config(path(name)), expected.CHECKS.get(name, []))


def build_table1_network():
    """Fault-free Table 1 network config."""
    return config_from_dict(network.documents()["network_baseline"])


def render_json(doc):
    return json.dumps(doc, indent=2) + "\n"


def write_all(target=DATA_DIR):
    os.makedirs(target, exist_ok=True)
    for name, doc in documents().items():
        with open(os.path.join(target, f"{name}.json"), "w", encoding="utf-8") as fh:
            fh.write(render_json(doc))
