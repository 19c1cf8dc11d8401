import json
import os
import time

import pandas as pd

from finite_rect.errors import RealRootednessError, UsageError
from finite_rect.finite_transforms import FiniteR
from finite_rect.poly import NonnegPoly

SCHEMA_VERSION = 1


def load_json_arg(text: str):
    """
    Parse a CLI argument that is either a path to a JSON file or inline JSON.
    """
    if text is None:
        raise UsageError("missing JSON argument")
    if os.path.isfile(text):
        with open(text) as f:
            text = f.read()
    try:
        return json.loads(text)
    except json.JSONDecodeError as err:
        raise UsageError(f"malformed JSON: {err}") from err


def load_poly(text: str) -> NonnegPoly:
    record = load_json_arg(text)
    if not isinstance(record, dict):
        raise UsageError("a polynomial must be a JSON object with 'coeffs' or 'roots'")
    try:
        return NonnegPoly.from_json(record)
    except RealRootednessError as err:
        raise UsageError(f"input polynomial is not real rooted with nonnegative roots: {err}") from err
    except (TypeError, ValueError) as err:
        raise UsageError(f"bad polynomial record: {err}") from err


def load_polys(text: str) -> list[NonnegPoly]:
    """A single polynomial record or a JSON list of them."""
    record = load_json_arg(text)
    records = record if isinstance(record, list) else [record]
    return [load_poly(json.dumps(r)) for r in records]


def load_finite_r(text: str) -> FiniteR:
    record = load_json_arg(text)
    if not isinstance(record, dict):
        raise UsageError("an R-transform must be a JSON object with d, m and r_coeffs")
    try:
        return FiniteR.from_json(record)
    except (TypeError, ValueError) as err:
        raise UsageError(f"bad R-transform record: {err}") from err


def save_report(payload: dict, rows: list[dict], command: str, fmt: str = "json", path: str = None) -> str:
    """
    Save a command report as JSON (payload plus schema_version) or CSV (rows).
    :param payload: JSON body
    :param rows: flat records for CSV
    :param command: command name, used for the default file name
    :param fmt: json or csv
    :param path: output path; default is reports/<command>_<time>.<fmt>

    :return: the path written
    """
    if path is None:
        path = os.path.join("reports", command + "_" + time.strftime("%Y%m%d-%H%M%S") + "." + fmt)
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    if fmt == "csv":
        pd.DataFrame(rows).to_csv(path, index=False, float_format="%.17g")
    else:
        with open(path, "w") as f:
            json.dump({"schema_version": SCHEMA_VERSION, "command": command, **payload}, f, indent=2)
    return path
