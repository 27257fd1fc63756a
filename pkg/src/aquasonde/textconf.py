"""Reader/writer for the plain-text config format shared by scenario,
calibration, and capture-config files.

Format: ``key = value`` lines, ``#`` comments, blank lines ignored.
A ``[name]`` heading starts a table section whose rows are
whitespace-separated columns.  Documented in docs/file-formats.md.
"""

from __future__ import annotations


def parse_plaintext(text: str) -> tuple[dict[str, str], dict[str, list[list[str]]]]:
    """Parse into (key/value pairs, table sections).

    Raises:
        ValueError: on a line that is neither a comment, a key = value
            pair, a section heading, nor a table row inside a section.
    """
    kv: dict[str, str] = {}
    tables: dict[str, list[list[str]]] = {}
    section: str | None = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            section = line[1:-1].strip()
            tables.setdefault(section, [])
            continue
        if section is not None:
            tables[section].append(line.split())
            continue
        if "=" not in line:
            raise ValueError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, value = line.split("=", 1)
        kv[key.strip()] = value.strip()
    return kv, tables


def format_key_values(title: str, kv: dict[str, str]) -> str:
    """Render key/value pairs in the same format parse_plaintext reads."""
    lines = [f"# {title}"]
    lines.extend(f"{key} = {value}" for key, value in kv.items())
    return "\n".join(lines) + "\n"
