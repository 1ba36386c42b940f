"""Regenerate the tiny fixture wheels used by the probe tests.

Each wheel is a plain zip with the minimum pip needs: package sources,
METADATA, WHEEL, top_level.txt and RECORD. Run from anywhere:

    python3 probe/fixtures/tools/build_wheels.py
"""

import base64
import hashlib
import io
import zipfile
from pathlib import Path

WHEELS_DIR = Path(__file__).resolve().parent.parent / "wheels"

WHEEL_FILE = """\
Wheel-Version: 1.0
Generator: fixture-builder
Root-Is-Purelib: true
Tag: py2.py3-none-any
"""


def record_hash(data: bytes) -> str:
    digest = hashlib.sha256(data).digest()
    return "sha256=" + base64.urlsafe_b64encode(digest).rstrip(b"=").decode("ascii")


def build_wheel(name, version, files, requires=(), top_level=None):
    """Write {name}-{version}-py2.py3-none-any.whl from a {path: text} map."""
    dist = name.replace("-", "_")
    info = f"{dist}-{version}.dist-info"
    metadata = [
        "Metadata-Version: 2.1",
        f"Name: {name}",
        f"Version: {version}",
        "Summary: probe test fixture",
    ]
    metadata.extend(f"Requires-Dist: {req}" for req in requires)
    contents = dict(files)
    contents[f"{info}/METADATA"] = "\n".join(metadata) + "\n"
    contents[f"{info}/WHEEL"] = WHEEL_FILE
    if top_level is not None:
        contents[f"{info}/top_level.txt"] = top_level + "\n"

    record_lines = []
    buffer = io.BytesIO()
    with zipfile.ZipFile(buffer, "w", zipfile.ZIP_DEFLATED) as zf:
        for path, text in sorted(contents.items()):
            data = text.encode("utf-8")
            zf.writestr(zipfile.ZipInfo(path, (2020, 1, 1, 0, 0, 0)), data)
            record_lines.append(f"{path},{record_hash(data)},{len(data)}")
        record_lines.append(f"{info}/RECORD,,")
        zf.writestr(
            zipfile.ZipInfo(f"{info}/RECORD", (2020, 1, 1, 0, 0, 0)),
            "\n".join(record_lines) + "\n",
        )

    out = WHEELS_DIR / f"{dist}-{version}-py2.py3-none-any.whl"
    out.write_bytes(buffer.getvalue())
    print(f"wrote {out.name}")


def main():
    WHEELS_DIR.mkdir(parents=True, exist_ok=True)

    # Plain importable package: one public class, one underscore name that
    # the probe must filter out.
    build_wheel(
        "demo",
        "1.0.0",
        {
            "demo/__init__.py": (
                "class X(object):\n"
                "    pass\n"
                "\n"
                "def _hidden():\n"
                "    pass\n"
            )
        },
        top_level="demo",
    )

    # Installs cleanly but cannot be imported.
    build_wheel(
        "brokenimport",
        "9.6.0",
        {
            "brokenimport/__init__.py": (
                "raise ImportError('this build cannot be imported')\n"
            )
        },
        top_level="brokenimport",
    )

    # Declares dependencies, including one behind an environment marker.
    build_wheel(
        "depdemo",
        "1.0.0",
        {"depdemo/__init__.py": "VALUE = 1\n"},
        requires=[
            "numpy (<1.16,>=1.11)",
            'futures (>=3.0) ; python_version < "3"',
        ],
        top_level="depdemo",
    )

    # Three releases of one package, each with a submodule, so version
    # discovery and recursive module enumeration have something to find.
    for version in ("0.9.9.2", "0.9.9.9", "0.9.9.9.1"):
        build_wheel(
            "gpkit",
            version,
            {
                "gpkit/__init__.py": (
                    "class Model(object):\n"
                    "    pass\n"
                    "\n"
                    "class Variable(object):\n"
                    "    pass\n"
                ),
                "gpkit/constraints.py": "class ConstraintSet(object):\n    pass\n",
            },
            top_level="gpkit",
        )

    # No top_level.txt on purpose: top levels must come from RECORD.
    build_wheel(
        "notoplevel",
        "2.0.0",
        {"ntl_pkg/__init__.py": "class Thing(object):\n    pass\n"},
    )


if __name__ == "__main__":
    main()
