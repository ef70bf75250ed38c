"""Reader for the experiment CSV dialect.

Files begin with a '#' metadata block (tool version, timestamp, resolved
configuration, column descriptions) followed by a header row and float
rows.  Figures never recompute physics; they consume these files as the
single source of numerical truth.
"""

import json
import warnings

EXPECTED_TOOL = "nlspin"


class MissingColumnError(KeyError):
    def __init__(self, column, path):
        super().__init__(f"column {column!r} missing from {path}")
        self.column = column


class Table:
    def __init__(self, meta, columns, rows, path):
        self.meta = meta
        self.columns = columns
        self.rows = rows
        self.path = path

    def column(self, name, kind=float):
        if name not in self.columns:
            raise MissingColumnError(name, self.path)
        idx = self.columns.index(name)
        return [kind(row[idx]) for row in self.rows]

    @property
    def config(self):
        for line in self.meta:
            if line.startswith("config:"):
                return json.loads(line.split(":", 1)[1])
        return {}


def read_table(path, expected_version=None):
    meta, columns, rows = [], None, []
    with open(path) as fh:
        for line in fh:
            line = line.rstrip("\n")
            if line.startswith("#"):
                meta.append(line[1:].strip())
            elif columns is None:
                columns = line.split(",")
            elif line:
                rows.append(line.split(","))
    if columns is None:
        raise ValueError(f"{path} carries no header row")
    if not meta or not meta[0].startswith(EXPECTED_TOOL):
        raise ValueError(f"{path} lacks the experiment metadata block")
    version = meta[0].split()[-1]
    if expected_version and version != expected_version:
        warnings.warn(
            f"{path} was written by {meta[0]!r}, expected version "
            f"{expected_version}; column layout may differ",
            stacklevel=2,
        )
    return Table(meta=meta, columns=columns, rows=rows, path=path)
