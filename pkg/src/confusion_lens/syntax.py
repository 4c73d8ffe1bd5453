"""AST labeling of regions: covering node, category mapping, filtering.

A region is labeled with the AST node that fully spans it while adding
as little extra code as possible: among all nodes containing the region,
the one with the smallest span wins; span ties go to the deeper node.
Node kinds map to broad categories via a data-driven table; regions in
noise categories (Type, Identifier, ControlFlow, Punctuation) are
dropped.
"""

import json
import logging
from importlib import resources

from .corpus import CharSpan
from .javaparse import Node, parse
from .regions import Region, with_category

logger = logging.getLogger(__name__)

CATEGORIES = (
    "Literal",
    "ProgramStructure",
    "Expression",
    "Operator",
    "ControlFlow",
    "Identifier",
    "Type",
    "Punctuation",
)
RETAINED_CATEGORIES = frozenset(
    ["Literal", "ProgramStructure", "Expression", "Operator"]
)
FALLBACK_CATEGORY = "Expression"


def load_category_map(path=None) -> dict[str, str]:
    """Node-kind -> category table; the bundled Java table by default."""
    if path is None:
        text = (
            resources.files("confusion_lens.data")
            .joinpath("java_category_map.json")
            .read_text(encoding="utf-8")
        )
    else:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    table = json.loads(text)
    for kind, category in table.items():
        if category not in CATEGORIES:
            raise ValueError(
                f"mapping for {kind!r} uses unknown category {category!r}"
            )
    return table


def covering_node(ast: Node, span: CharSpan) -> Node:
    """Smallest AST node fully spanning ``span``; deeper node on ties."""
    best = None
    best_key = None
    for node in ast.walk():
        if node.start <= span.start and node.end >= span.end:
            key = (node.end - node.start, -node.depth())
            if best is None or key < best_key:
                best = node
                best_key = key
    if best is None:
        # the root spans trailing/leading whitespace outside any token
        best = ast
    return best


def categorize(node_kind: str, table: dict[str, str]) -> str:
    category = table.get(node_kind)
    if category is None:
        logger.warning("no category mapping for node kind %r; using %s",
                       node_kind, FALLBACK_CATEGORY)
        return FALLBACK_CATEGORY
    return category


def categorize_regions(
    regions: list[Region], source: str, table: dict[str, str]
) -> list[Region]:
    """Parse once and label every region with node kind and category."""
    if not regions:
        return []
    ast = parse(source)
    out = []
    for region in regions:
        node = covering_node(ast, region.span)
        out.append(with_category(region, categorize(node.kind, table), node.kind))
    return out


def filter_regions(regions: list[Region]) -> list[Region]:
    """Keep only regions in the retained categories, preserving order."""
    return [r for r in regions if r.category in RETAINED_CATEGORIES]
