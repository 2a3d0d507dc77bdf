"""Plain-text grid dumps for external plotting tools.

Layout::

    # tugwar-grid v1
    # dimension <n>
    # extents <e_1> ... <e_n>
    # origin <x_1> ... <x_n>
    # h <spacing>
    # epsilon <eps>
    # p <p>
    # columns: index-vector,class,value
    i_1 ... i_n,<Interior|BoundaryStrip|Exterior>,<value>

Records follow row-major (C) order of the index vector.  Physical position of
a record is ``origin + h * index``.  Exterior values are written as ``nan``.
"""
import numpy as np

from .domain import NodeClass

CLASS_LABELS = {NodeClass.INTERIOR: "Interior", NodeClass.STRIP: "BoundaryStrip",
                NodeClass.EXTERIOR: "Exterior"}
_LABEL_TO_CLASS = {v: k for k, v in CLASS_LABELS.items()}


def _num(x):
    return repr(float(x))


def format_grid_dump(field):
    dom = field.domain
    params = dom.params
    lines = [
        "# tugwar-grid v1",
        f"# dimension {dom.n}",
        "# extents " + " ".join(str(e) for e in dom.extents),
        "# origin " + " ".join(_num(o) for o in dom.origin),
        f"# h {_num(dom.h)}",
        f"# epsilon {_num(params.epsilon)}",
        f"# p {_num(params.p)}",
        "# columns: index-vector,class,value",
    ]
    idx = np.stack(np.unravel_index(np.arange(dom.size), dom.extents), axis=-1)
    cls = dom.classes()
    vals = field.flat
    for k in range(dom.size):
        c = NodeClass(cls[k])
        v = "nan" if c == NodeClass.EXTERIOR else _num(vals[k])
        lines.append(f"{' '.join(map(str, idx[k]))},{CLASS_LABELS[c]},{v}")
    return "\n".join(lines) + "\n"


def write_grid_dump(field, path):
    with open(path, "w") as fh:
        fh.write(format_grid_dump(field))


def read_grid_dump(path):
    """Parse a dump into ``(header, index, classes, values)`` arrays."""
    header = {}
    index, classes, values = [], [], []
    with open(path) as fh:
        for line in fh:
            line = line.rstrip("\n")
            if line.startswith("#"):
                parts = line[1:].split()
                if len(parts) >= 2 and parts[0] in ("dimension", "extents", "origin",
                                                    "h", "epsilon", "p"):
                    header[parts[0]] = [float(x) for x in parts[1:]]
                continue
            if not line:
                continue
            ivec, cls, val = line.split(",")
            index.append([int(x) for x in ivec.split()])
            classes.append(_LABEL_TO_CLASS[cls])
            values.append(float(val))
    header["dimension"] = int(header["dimension"][0])
    header["extents"] = tuple(int(e) for e in header["extents"])
    for key in ("h", "epsilon", "p"):
        header[key] = header[key][0]
    return header, np.array(index), np.array(classes), np.array(values)
