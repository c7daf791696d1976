"""Reference five-state chains with externally known spectra.

Each chain is quoted to four or five decimals, so rows sum to 1 only
approximately and the stationary vector is approximate as well; loading
helpers are expected to renormalize.  The expected second and third
eigenvalue moduli are part of the fixture and are used to validate the
spectral computations.
"""

# strong dependence, signal rate 0.1
CHAIN_A = {
    "f_set": (0, 1),
    "psig": 0.1,
    "slem": 0.9074,
    "tlem": 0.0645,
    "pi": [0.3006, 0.5994, 0.0505, 0.0211, 0.0283],
    "matrix": [
        [0.9286, 0.0122, 0.0276, 0.0063, 0.0253],
        [0.0150, 0.8548, 0.0651, 0.0310, 0.0340],
        [0.0250, 0.9629, 0.0097, 0.0008, 0.0016],
        [0.1653, 0.7046, 0.0955, 0.0267, 0.0079],
        [0.2716, 0.6988, 0.0257, 0.0007, 0.0033],
    ],
}

# stronger dependence, signal rate 0.1
CHAIN_B = {
    "f_set": (0, 1),
    "psig": 0.1,
    "slem": 0.9566,
    "tlem": 0.1155,
    "pi": [0.67187, 0.22813, 0.02414, 0.033354, 0.042506],
    "matrix": [
        [0.8993, 0.0017522, 0.0098301, 0.031722, 0.057401],
        [0.015641, 0.96471, 0.0086498, 0.0077613, 0.0032366],
        [0.66064, 0.11572, 0.075542, 0.067761, 0.080337],
        [0.71019, 0.090088, 0.06356, 0.13104, 0.0051248],
        [0.57536, 0.025292, 0.27334, 0.10032, 0.025692],
    ],
}

# strong dependence with large third eigenmodulus, signal rate 0.05
CHAIN_C = {
    "f_set": (0, 1),
    "psig": 0.05,
    "slem": 0.9591,
    "tlem": 0.5232,
    "pi": [0.47319, 0.47681, 0.018907, 0.01173, 0.019363],
    "matrix": [
        [0.0014, 0.9653, 0.0124, 0.0080, 0.0129],
        [0.9506, 0.0011, 0.0056, 0.0155, 0.0272],
        [0.3236, 0.1203, 0.5312, 0.0238, 0.0011],
        [0.8080, 0.1589, 0.0190, 0.0025, 0.0115],
        [0.1898, 0.7959, 0.0053, 0.0024, 0.0066],
    ],
}

# moderate dependence, signal rate 0.1; third modulus not pinned
CHAIN_D = {
    "f_set": (0, 1),
    "psig": 0.1,
    "slem": 0.6019,
    "tlem": None,
    "pi": [0.4969, 0.4031, 0.0376, 0.0349, 0.0275],
    "matrix": [
        [0.1999, 0.6548, 0.0537, 0.0561, 0.0354],
        [0.8932, 0.0765, 0.0137, 0.0088, 0.0076],
        [0.4431, 0.4365, 0.0721, 0.0284, 0.0199],
        [0.1159, 0.8271, 0.0371, 0.0129, 0.0070],
        [0.6080, 0.0597, 0.0505, 0.0710, 0.2108],
    ],
}

REFERENCE_CHAINS = {"A": CHAIN_A, "B": CHAIN_B, "C": CHAIN_C, "D": CHAIN_D}
