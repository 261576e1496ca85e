"""Published experimental numbers, transcribed as printed.

The count tables are per-series means over 150 repetitions of 1.4 s, so each
context appears once (series 0). Their columns C1..C3 number the detectors
differently from the setting in :mod:`kcbs_optics.network`: the printed
columns 1 and 3 are detectors 3 and 1 of the setting. ``PRINTED_ROLES`` is
the role map to use with these tables; :func:`to_setting_labels` relabels a
series into the setting's numbering instead.
"""

from __future__ import annotations

from .montecarlo import CountsSeries

PRINTED_ROLES: dict[int, tuple[int, int, int]] = {
    1: (2, 1, 3),
    2: (1, 3, 2),
    3: (3, 2, 1),
    4: (2, 1, 3),
    5: (1, 2, 3),
}


def _series(rows) -> list[CountsSeries]:
    return [CountsSeries(i, 0, *row) for i, row in enumerate(rows, start=1)]


def to_setting_labels(s: CountsSeries) -> CountsSeries:
    """Swap printed detectors 1 and 3 so that the setting's roles apply."""
    return CountsSeries(s.context, s.series, s.c3, s.c2, s.c1, s.c23, s.c13, s.c12, s.c123, s.nt)


# Heralded single photons; columns C1, C2, C3, C12, C13, C23, C123, NT.
HERALDED_COUNTS = _series([
    (25347, 25075, 6082, 72, 19, 19, 0, 346798),
    (26569, 5696, 25698, 20, 77, 19, 0, 356275),
    (6494, 24918, 26345, 20, 21, 75, 0, 360549),
    (27041, 25313, 6779, 77, 24, 23, 0, 363776),
    (27349, 26333, 6244, 79, 22, 21, 0, 366636),
])

# Weak coherent light, keyed by the printed mean photon number.
COHERENT_COUNTS: dict[float, list[CountsSeries]] = {
    0.10: _series([
        (119146, 118814, 29801, 5519, 1390, 1390, 65, 2591148),
        (120200, 26983, 120803, 1268, 5669, 1277, 60, 2591149),
        (29812, 114535, 120642, 1341, 1405, 5416, 62, 2591154),
        (119672, 112374, 30486, 5250, 1429, 1344, 63, 2591153),
        (118994, 114533, 26860, 5329, 1259, 1217, 57, 2591152),
    ]),
    0.40: _series([
        (421355, 418210, 109382, 68666, 17994, 17886, 2948, 2591147),
        (433901, 103593, 432928, 17508, 73118, 17511, 2964, 2591147),
        (115941, 405581, 427735, 18309, 19348, 67625, 3071, 2591145),
        (431660, 402893, 114514, 67727, 19314, 18032, 3050, 2591145),
        (424048, 410394, 104782, 67783, 17333, 16789, 2779, 2591146),
    ]),
    0.72: _series([
        (717113, 690496, 194970, 192895, 54581, 52589, 14782, 2591145),
        (707364, 185247, 680115, 51256, 188436, 49489, 13765, 2591144),
        (210232, 697006, 732012, 57056, 59952, 198775, 16362, 2591144),
        (719289, 685378, 199189, 192063, 55986, 53349, 15053, 2591142),
        (731302, 712236, 196599, 202803, 56016, 54567, 15611, 2591142),
    ]),
    0.99: _series([
        (897217, 861074, 251446, 302309, 88699, 85192, 30156, 2591147),
        (959875, 265437, 924061, 99344, 345923, 95879, 36051, 2591149),
        (278189, 926253, 925607, 100397, 100443, 334755, 36496, 2591149),
        (946736, 923119, 273625, 340558, 101080, 98725, 36627, 2591148),
        (951452, 926865, 279351, 343924, 103876, 101411, 37861, 2591147),
    ]),
    1.24: _series([
        (1115288, 1081923, 326521, 470045, 141901, 137749, 60177, 2591146),
        (1126739, 314891, 1101507, 138200, 483343, 135289, 59669, 2591145),
        (338075, 1078697, 1106430, 141996, 145671, 465190, 61561, 2591145),
        (1106730, 1067832, 335458, 460636, 144953, 140054, 60772, 2591144),
        (1115093, 1090014, 335552, 473394, 145785, 142681, 62308, 2591144),
    ]),
    1.57: _series([
        (1318906, 1291769, 428766, 663785, 220573, 216089, 111736, 2591216),
        (1346500, 397968, 1345865, 208695, 705972, 208919, 110158, 2591215),
        (415002, 1240955, 1303059, 200562, 210617, 630461, 102429, 2591208),
        (1280196, 1230235, 426232, 613613, 212748, 204461, 102607, 2591209),
        (1324944, 1311555, 379163, 676899, 195756, 193872, 100637, 2591210),
    ]),
    1.84: _series([
        (1455626, 1424706, 492345, 807816, 279096, 273356, 155817, 2591222),
        (1449516, 452415, 1439459, 255813, 814156, 254502, 144729, 2591223),
        (480699, 1425190, 1465853, 266827, 274549, 814810, 153422, 2591224),
        (1463814, 1424103, 511443, 813015, 292407, 284713, 163604, 2591225),
        (1476570, 1468857, 454731, 845609, 262060, 260935, 151153, 2591226),
    ]),
}

# Coherent-light summary: nbar -> {event: (beta_th, beta_exp, P_th, P_exp)}.
COHERENT_SUMMARY: dict[float, dict[str, tuple[float, float, float, float]]] = {
    0.10: {"E1": (-3.9611, -3.9471, 0.0961, 0.0960), "E2": (-3.7830, -3.7680, 0.0991, 0.0991), "E3": (4.1296, 4.1315, 1.0, 1.0)},
    0.40: {"E1": (-4.0078, -3.9788, 0.2904, 0.2896), "E2": (-3.3129, -3.2858, 0.3282, 0.3278), "E3": (2.2720, 2.2840, 1.0, 1.0)},
    0.72: {"E1": (-4.0579, -4.0146, 0.4075, 0.4049), "E2": (-2.7798, -2.7448, 0.5117, 0.5105), "E3": (1.0192, 1.0462, 1.0, 1.0)},
    0.99: {"E1": (-4.1003, -4.0574, 0.4551, 0.4505), "E2": (-2.3081, -2.2716, 0.6293, 0.6271), "E3": (0.4009, 0.4404, 1.0, 1.0)},
    1.24: {"E1": (-4.1378, -4.1018, 0.4694, 0.4647), "E2": (-1.8802, -1.8478, 0.7107, 0.7084), "E3": (0.1103, 0.1488, 1.0, 1.0)},
    1.57: {"E1": (-4.1859, -4.1482, 0.4614, 0.4552), "E2": (-1.3215, -1.2843, 0.7909, 0.7877), "E3": (0.0002, 0.0506, 1.0, 1.0)},
    1.84: {"E1": (-4.2260, -4.1843, 0.4394, 0.4316), "E2": (-0.8503, -0.8069, 0.8417, 0.8378), "E3": (0.0756, 0.1352, 1.0, 1.0)},
}

# Heralded single photons, beta per event with and without fair sampling.
HERALDED_BETA = {
    True: {"E1": -3.9284, "E2": -3.9176, "E3": -3.9176},
    False: {"E1": -3.9284, "E2": -3.9176, "E3": 3.5550},
}

# Heralded single photons under E2 with fair sampling: (P(A_i=-1), P(A_{i+1}=-1), P(both), <A_i A_{i+1}>).
HERALDED_PROBABILITIES = (
    (0.4446, 0.4495, 0.0013, -0.7831),
    (0.4593, 0.4442, 0.0013, -0.8017),
    (0.4570, 0.4323, 0.0013, -0.7735),
    (0.4290, 0.4583, 0.0013, -0.7692),
    (0.4573, 0.4403, 0.0013, -0.7900),
)

# Repeatability of A1 between contexts 1 and 5:
# (P(A1=-1), P(A1'=+1 | A1=-1), P(A1=+1), P(A1'=-1 | A1=+1)) and the resulting bound.
BOUND_INPUTS = (0.4446, 0.0058, 0.5554, 0.0020)
CORRECTED_BOUND = -3.0074

HERALDING_EFFICIENCY = 0.162
HERALDED_G2 = 0.0397
