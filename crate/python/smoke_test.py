"""Smoke test for the pywordgroup extension.

Build and install first:

    pip install maturin
    maturin develop --release -m crates/python/Cargo.toml

then run `python python/smoke_test.py`.
"""

import json
import math

import pywordgroup as wg


def check_corpus():
    tokens = wg.tokenize("At nine O'clock, the Dog ran.")
    assert tokens == ["at", "nine", "o'clock", "the", "dog", "ran"], tokens
    vocab = wg.Vocabulary(["b", "a", "b", "c", "b", "a"])
    assert vocab.items() == [("b", 3), ("a", 2), ("c", 1)]
    assert vocab.top(2) == ["b", "a"]
    assert len(vocab) == 3 and vocab.total == 6 and "c" in vocab


def check_counts():
    tokens = ["a", "b", "a", "c", "a", "b"]
    table = wg.count(tokens, ["a", "b"], ["a", "b", "c"])
    assert table.get("a", "b") == 3 and table.get("a", "c") == 2
    assert table.positions("a") == 5
    vectors = table.vectors()
    row = vectors.row("a")
    assert math.isclose(sum(row), 1.0)
    assert vectors.flagged == []


def check_metrics_and_tree():
    assert wg.euclidean([0.0, 0.0], [3.0, 4.0]) == 5.0
    assert math.isclose(wg.spearman_rho([1, 2, 3, 4], [10, 20, 30, 45]), 1.0)
    assert math.isclose(wg.spearman_distance([1, 2, 3], [3, 2, 1]), 2.0)
    try:
        wg.spearman_rho([1, 1, 1], [1, 2, 3])
    except ValueError:
        pass
    else:
        raise AssertionError("constant vector accepted")

    d = wg.DistanceMatrix(["A", "B", "C"], [[0, 1, 4], [1, 0, 5], [4, 5, 0]])
    tree = wg.agglomerate(d, "average")
    assert tree.to_newick() == "((A:1,B:1):3.5,C:4.5);"
    assert [m[2] for m in tree.merges] == [1.0, 4.5]
    assert tree.cut(2) == {"A": 0, "B": 0, "C": 1}
    assert wg.Dendrogram.from_json(tree.to_json()) == tree
    assert json.loads(tree.to_json())["id"] == 4


def check_network():
    tokens, labels = wg.generate_elman(2000, seed=3)
    assert len(tokens) == len(labels)
    grammar = wg.default_grammar()
    assert len(grammar["NOUN"]) == 8 and len(grammar["VERB"]) == 6
    words = sorted(set(tokens))
    occurrences = wg.encode_occurrences(tokens, words, words)
    stream = [x for _, x in occurrences]
    gold = [labels[pos] for pos, _ in occurrences]
    net = wg.CompetitiveNetwork(stream, num_units=2, seed=1)
    history = net.train(stream)
    assert len(history) == 3 and all(sum(h) == len(stream) for h in history)
    units = net.classify(stream)
    accuracy = wg.category_accuracy(units, gold)
    assert accuracy >= 0.95, accuracy
    assert json.loads(net.snapshot_json())["K"] == 2


def check_evaluation():
    gold = {"g1": ["a", "b"], "g2": ["c", "d"]}
    assert wg.purity({"a": 0, "b": 0, "c": 1, "d": 1}, gold) == 1.0
    macro, per_group = wg.group_f1({"a": 0, "b": 1, "c": 2, "d": 2}, gold)
    assert math.isclose(per_group["g1"], 2 / 3) and per_group["g2"] == 1.0
    assert math.isclose(macro, 5 / 6)
    assert any("o'clock" in words for words in wg.table1().values())


if __name__ == "__main__":
    for check in (check_corpus, check_counts, check_metrics_and_tree, check_network, check_evaluation):
        check()
        print(f"ok {check.__name__}")
    print("pywordgroup smoke test passed")
