"""Published accuracy values the reproduce command prints next to measured
results.

Tables 2a/3/4 carry the logistic-regression columns; table 5 the overall
comparison as published. Entries published as DNF are None here and are
treated as missing targets, not goals. Dataset rows are keyed by the
lowercase dataset name used for file discovery.
"""

DATASET_ORDER = ("music", "scene", "yeast", "genbase", "medical", "enron", "reuters")

# N, L, d, label cardinality as published, used by inspect-level checks.
DATASET_STATS = {
    "music": (593, 6, 72, 1.87),
    "scene": (2407, 6, 294, 1.07),
    "yeast": (2417, 14, 103, 4.24),
    "genbase": (661, 27, 1185, 1.25),
    "medical": (978, 45, 1449, 1.25),
    "enron": (1702, 53, 1001, 3.38),
    "reuters": (6000, 103, 500, 1.46),
}

TABLES = {
    "2a": {
        "methods": ("ecc_r", "ecc"),
        "values": {
            "music": (0.558, 0.504),
            "scene": (0.709, 0.554),
            "yeast": (0.513, 0.504),
            "genbase": (0.971, 0.977),
            "medical": (0.449, 0.706),
            "enron": (0.451, 0.355),
            "reuters": (0.408, 0.376),
        },
    },
    "3": {
        "methods": ("rak_r", "rakel"),
        "values": {
            "music": (0.538, 0.465),
            "scene": (0.663, 0.469),
            "yeast": (0.497, None),
            "genbase": (0.968, 0.976),
            "medical": (0.494, 0.639),
            "enron": (0.376, 0.273),
            "reuters": (0.285, None),
        },
    },
    "4": {
        "methods": ("fw_r", "fw"),
        "values": {
            "music": (0.549, 0.492),
            "scene": (0.660, 0.490),
            "yeast": (0.507, 0.495),
            "genbase": (0.949, 0.975),
            "medical": (0.492, None),
            "enron": (0.376, None),
        },
    },
    "5": {
        "methods": ("dbn3_bp", "dbn2_ecc", "ecc_r", "ecc", "rakel", "fw", "bpnn"),
        "values": {
            "music": (0.577, 0.581, 0.581, 0.576, 0.579, 0.573, 0.533),
            "scene": (0.731, 0.742, 0.731, 0.710, 0.684, 0.649, 0.552),
            "yeast": (0.529, 0.531, 0.532, 0.535, 0.537, 0.538, 0.491),
            "genbase": (0.984, 0.985, 0.979, 0.981, 0.984, 0.985, 0.049),
            "medical": (0.746, 0.742, 0.695, 0.770, 0.743, 0.748, 0.053),
            "enron": (0.442, 0.480, 0.469, 0.454, 0.413, 0.408, 0.144),
            "reuters": (0.410, 0.451, 0.459, 0.461, 0.337, None, 0.004),
        },
    },
}


def table_ids():
    return tuple(TABLES)


def reference_value(table_id, dataset, method):
    table = TABLES[table_id]
    row = table["values"].get(dataset)
    if row is None:
        return None
    return row[table["methods"].index(method)]
