"""
Result writers: CSV tables through pandas, JSON documents and plotly figures (HTML and SVG).
"""

import json
import logging
import math
from pathlib import Path
from typing import Any, Dict, List, Union

import numpy as np
import pandas as pd
import plotly.graph_objects as go

from config.settings import FLOAT_FORMAT
from utils.errors import ConfigError

logger = logging.getLogger(__name__)


def ensure_output_dir(path: Union[str, Path]) -> Path:
    """
    Create the output directory if needed.

    Raises:
        ConfigError: if the directory cannot be created or written
    """
    directory = Path(path)
    try:
        directory.mkdir(parents=True, exist_ok=True)
        marker = directory / ".write_test"
        marker.write_text("")
        marker.unlink()
    except OSError as e:
        raise ConfigError(f"output directory is not writable: {directory}: {str(e)}") from e
    return directory


def write_csv(rows: Union[List[Dict[str, Any]], pd.DataFrame], path: Path, columns: List[str] = None) -> Path:
    """UTF-8 CSV with a header row and %.12e floats."""
    table = rows if isinstance(rows, pd.DataFrame) else pd.DataFrame(rows, columns=columns)
    if columns is not None:
        table = table[columns]
    table.to_csv(path, index=False, float_format=FLOAT_FORMAT, encoding="utf-8", lineterminator="\n")
    logger.info(f"Wrote {len(table)} rows to {path}")
    return path


def _jsonable(value: Any) -> Any:
    if isinstance(value, dict):
        return {str(key): _jsonable(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(item) for item in value]
    if isinstance(value, np.ndarray):
        return _jsonable(value.tolist())
    if isinstance(value, (complex, np.complexfloating)):
        return [_jsonable(float(value.real)), _jsonable(float(value.imag))]
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        # JSON has no inf/nan
        return value if math.isfinite(value) else str(value)
    if isinstance(value, np.bool_):
        return bool(value)
    return value


def write_json(document: Dict[str, Any], path: Path) -> Path:
    """JSON in the document's own key order, two-space indented."""
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        json.dump(_jsonable(document), f, indent=2)
        f.write("\n")
    logger.info(f"Wrote {path}")
    return path


def write_figure(figure: go.Figure, path: Path) -> List[Path]:
    """
    Self-contained HTML (plotly.js embedded, fixed div id) plus a static SVG
    export next to it.

    Raises:
        ConfigError: if the SVG cannot be rendered or written
    """
    figure.write_html(str(path), include_plotlyjs=True, full_html=True, div_id=path.stem)
    svg = path.with_suffix(".svg")
    try:
        figure.write_image(str(svg), format="svg")
    except (ValueError, RuntimeError, OSError) as e:
        raise ConfigError(f"cannot export figure {svg}: {str(e)}") from e
    logger.info(f"Wrote figure {path} and {svg.name}")
    return [path, svg]
