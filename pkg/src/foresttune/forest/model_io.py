"""Save and load forests as versioned JSON model files.

Layout: the first line is the magic ``FORESTTUNE-MODEL v1``; the rest of the
file is one JSON document (see MODEL_FORMAT.md).
"""

import json
from pathlib import Path
from typing import Any, Dict

import numpy as np

from foresttune.data.dataset import ColumnKind, ColumnType, Task
from foresttune.errors import CorruptModelError, ModelVersionError
from foresttune.forest.ensemble import Forest
from foresttune.forest.params import HyperParams
from foresttune.forest.tree import Tree
from foresttune.logging_utils import setup_logger
from foresttune.seeding import RNG_SCHEME

logger = setup_logger(__name__)

MAGIC = "FORESTTUNE-MODEL"
FORMAT_VERSION = "v1"


def forest_to_dict(forest: Forest) -> Dict[str, Any]:
    return {
        "rng_scheme": RNG_SCHEME,
        "master_seed": forest.master_seed,
        "task": forest.task.value,
        "target_name": forest.target_name,
        "classes": list(forest.classes),
        "n_train": forest.n_train,
        "schema": [
            {
                "name": name,
                "kind": forest.column_types[name].kind.value,
                "levels": list(forest.column_types[name].levels),
            }
            for name in forest.feature_names
        ],
        "category_orders": forest.category_orders,
        "params": forest.params.to_dict(),
        "trees": [tree.to_dict() for tree in forest.trees],
        "bags": [bag.tolist() for bag in forest.bags],
    }


def forest_from_dict(payload: Dict[str, Any]) -> Forest:
    schema = payload["schema"]
    column_types = {
        column["name"]: ColumnType(ColumnKind(column["kind"]), tuple(column["levels"]))
        for column in schema
    }
    params = HyperParams.from_dict(payload["params"])
    trees = [Tree.from_dict(tree) for tree in payload["trees"]]
    bags = [np.asarray(bag, dtype=np.int64) for bag in payload["bags"]]
    if len(trees) != params.num_trees or len(bags) != len(trees):
        raise CorruptModelError(
            f"model declares {params.num_trees} trees but holds {len(trees)} trees and {len(bags)} bags"
        )
    return Forest(
        trees=trees,
        bags=bags,
        params=params,
        master_seed=int(payload["master_seed"]),
        task=Task(payload["task"]),
        classes=tuple(payload["classes"]),
        feature_names=[column["name"] for column in schema],
        column_types=column_types,
        target_name=payload["target_name"],
        category_orders={k: list(v) for k, v in payload["category_orders"].items()},
        n_train=int(payload["n_train"]),
    )


def save_model(forest: Forest, path: Path) -> Path:
    """
    Write a forest to ``path``.

    The output is a pure function of the forest, so equal forests give
    byte-identical files.

    Args:
        forest: Trained forest
        path: Destination file

    Returns:
        The written path
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    body = json.dumps(forest_to_dict(forest), sort_keys=True, separators=(",", ":"))
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(f"{MAGIC} {FORMAT_VERSION}\n")
        f.write(body)
        f.write("\n")
    logger.info(f"Model saved to {path}")
    return path


def load_model(path: Path) -> Forest:
    """
    Load a forest written by ``save_model``.

    Args:
        path: Model file

    Returns:
        Forest

    Raises:
        ModelVersionError: The magic line names another format version
        CorruptModelError: Missing magic line, truncated or malformed body
    """
    path = Path(path)
    logger.info(f"Loading model from {path}")
    try:
        with open(path, "r", encoding="utf-8") as f:
            header = f.readline().rstrip("\n")
            body = f.read()
    except UnicodeDecodeError as e:
        raise CorruptModelError(f"{path.name} is not UTF-8 text: {e}") from e

    parts = header.split(" ")
    if len(parts) != 2 or parts[0] != MAGIC:
        raise CorruptModelError(f"{path.name} is not a foresttune model file")
    if parts[1] != FORMAT_VERSION:
        raise ModelVersionError(
            f"unsupported model format version '{parts[1]}' (expected {FORMAT_VERSION})"
        )

    try:
        payload = json.loads(body)
        return forest_from_dict(payload)
    except CorruptModelError:
        raise
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as e:
        raise CorruptModelError(f"corrupt model file {path.name}: {e}") from e
