"""Python interface to the kfair C++ core.

Heavy objects (networks, schemas) stay on the C++ side; reports come back as
plain dicts decoded from the core's JSON serialization.
"""

import json as _json

import _kfair

__version__ = _kfair.__version__

Network = _kfair.Network
FeatureSchema = _kfair.FeatureSchema
KfairError = _kfair.KfairError

load_network = _kfair.load_network
parse_network = _kfair.parse_network
load_schema = _kfair.load_schema
parse_schema = _kfair.parse_schema
forward = _kfair.forward
score = _kfair.score
predict_label = _kfair.predict_label


def k_discrimination(network, schema, instance, epsilon=0.05):
    """Counterfactual bucket record for one instance (dict of feature values)."""
    return _json.loads(
        _kfair.k_discrimination(network, schema, _json.dumps(instance), epsilon)
    )


def certify(network, schema, epsilon=0.05, timeout_seconds=100.0, early_stop=True):
    """2-fairness certificate as a dict: verdict, gaps, counterexample."""
    return _json.loads(
        _kfair.certify(network, schema, epsilon, timeout_seconds, early_stop)
    )


def search(network, schema, csv_text="", **config):
    """k-discrimination search report as a dict. Config keys mirror the CLI."""
    return _json.loads(
        _kfair.search(network, schema, csv_text, _json.dumps(config))
    )


def explain(network, schema, seeds, **config):
    """Decision-rule explanations around the given seed instances."""
    return _json.loads(
        _kfair.explain(network, schema, _json.dumps(seeds), _json.dumps(config))
    )
