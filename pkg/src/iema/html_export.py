"""Single-file HTML export: the bundle embedded verbatim plus an inlined UI.

The output opens from disk with no server. The bundle text is stored byte
for byte inside a JSON script element with id ``iema-data`` so tools (and
the dashboard) can re-extract it exactly.
"""

from __future__ import annotations

from .assets import asset_text
from .bundle import parse_bundle, serialize_bundle
from .errors import ExportError

_TEMPLATE = """<!DOCTYPE html>
<html lang="en">
<head>
<meta charset="utf-8">
<title>Explanation dialogue</title>
<style>
body {{ font-family: system-ui, sans-serif; margin: 1.5rem; color: #222; }}
h1 {{ font-size: 1.3rem; }} h2 {{ font-size: 1.0rem; }}
.note {{ color: #666; font-size: 0.85rem; }}
.grid {{ display: grid; grid-template-columns: repeat(auto-fill, minmax(380px, 1fr)); gap: 1rem; }}
.panel {{ border: 1px solid #ddd; border-radius: 6px; padding: 0.6rem 0.9rem; background: #fcfcfc; }}
.suggestions li {{ display: inline-block; margin: 0 0.4rem 0.4rem 0; padding: 0.2rem 0.55rem;
                   border: 1px solid #4878b0; border-radius: 999px; font-size: 0.85rem; }}
</style>
</head>
<body>
<div id="app"></div>
<script type="application/json" id="iema-data">{bundle}</script>
<script>
{ui}
</script>
</body>
</html>
"""


def export_html(bundle: dict | str | bytes, ui_asset: str | None = None) -> str:
    """Render one self-contained HTML document for a bundle.

    ``ui_asset`` is alternative JavaScript to inline in place of the built-in
    viewer (the dashboard build, for instance).
    """
    if isinstance(bundle, (str, bytes)):
        parse_bundle(bundle)  # raises ExportError when invalid
        text = bundle.decode("utf-8") if isinstance(bundle, bytes) else bundle
    else:
        text = serialize_bundle(bundle)
    lowered = text.lower()
    if "</script" in lowered:
        raise ExportError("bundle text contains '</script', cannot embed it verbatim")
    ui = ui_asset if ui_asset is not None else asset_text("viewer.js")
    if "</script" in ui.lower():
        raise ExportError("UI asset contains '</script', cannot inline it")
    return _TEMPLATE.format(bundle=text, ui=ui)


def extract_bundle_text(html: str) -> str:
    """Inverse of the embedding: the exact bundle bytes from an exported file."""
    marker = '<script type="application/json" id="iema-data">'
    start = html.find(marker)
    if start == -1:
        raise ExportError("no embedded bundle found")
    start += len(marker)
    end = html.find("</scr" + "ipt>", start)
    if end == -1:
        raise ExportError("embedded bundle is not terminated")
    return html[start:end]
