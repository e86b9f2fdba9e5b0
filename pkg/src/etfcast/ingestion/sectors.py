"""Sector map loading from a YAML config file.

The file is a flat mapping, e.g.::

    XLF: financials
    XOP: oil and gas

Duplicate symbols are a config error, which plain YAML loading would
silently swallow, so loading goes through a duplicate-detecting loader.
"""

from __future__ import annotations

from pathlib import Path

import yaml

from ..errors import DuplicateEtfError
from .types import SectorMap


class _StrictLoader(yaml.SafeLoader):
    pass


def _construct_mapping(loader, node):
    seen = set()
    for key_node, _ in node.value:
        key = loader.construct_object(key_node)
        if key in seen:
            raise DuplicateEtfError(f"ETF {key} listed more than once in sector map")
        seen.add(key)
    return loader.construct_mapping(node)


_StrictLoader.add_constructor(
    yaml.resolver.BaseResolver.DEFAULT_MAPPING_TAG, _construct_mapping)


def load_sector_map(path: Path) -> SectorMap:
    raw = yaml.load(Path(path).read_text(encoding="utf-8"), Loader=_StrictLoader)
    if not isinstance(raw, dict) or not raw:
        raise ValueError(f"sector map {path} must be a non-empty mapping")
    return SectorMap({str(k): str(v) for k, v in raw.items()})
