"""Hand-derived closed forms for the umbrella and jacket examples.

These are written out independently of the simulator and serve as oracles.
Bit strings are ordered s0 s1 ... .
"""

import math


def umbrella_probs(action, tau, tau0=None):
    a = tau / 2
    if action == 1:
        return {"00": math.cos(a) ** 2, "10": math.sin(a) ** 2, "01": 0.0, "11": 0.0}
    if action == 2:
        return {"01": math.cos(a) ** 2, "11": math.sin(a) ** 2, "00": 0.0, "10": 0.0}
    b, h = (tau - tau0) / 2, tau0 / 2
    return {
        "00": math.cos(b) ** 2 * math.cos(h) ** 2,
        "01": math.sin(b) ** 2 * math.sin(h) ** 2,
        "10": math.sin(b) ** 2 * math.cos(h) ** 2,
        "11": math.cos(b) ** 2 * math.sin(h) ** 2,
    }


def umbrella_e1(v, tau):
    return v * math.cos(tau / 2) ** 2


def umbrella_e2(v, c):
    return v - c


def umbrella_e3(v, c, d, tau, tau0):
    b, h = (tau - tau0) / 2, tau0 / 2
    return v * (1 - math.sin(b) ** 2 * math.cos(h) ** 2) - c * math.sin(h) ** 2 - d


def umbrella_e3_second_moment(v, c, d, tau, tau0):
    b, h = (tau - tau0) / 2, tau0 / 2
    return (
        (v - d) ** 2 * math.cos(b) ** 2 * math.cos(h) ** 2
        + (v - c - d) ** 2 * math.sin(h) ** 2
        + d**2 * math.sin(b) ** 2 * math.cos(h) ** 2
    )


def umbrella_sigma1(v, tau):
    return 0.5 * v * abs(math.sin(tau))


JACKET_ACTIONS = (
    "nothing",
    "jacket",
    "umbrella",
    "umbrella_and_jacket",
    "intermediate_decision",
    "postponed_decision",
)

JACKET_SUPPORT = {
    "nothing": {"0000": 0.5, "1100": 0.5},
    "jacket": {"0001": 0.5, "1101": 0.5},
    "umbrella": {"0010": 0.5, "1110": 0.5},
    "umbrella_and_jacket": {"0011": 0.5, "1111": 0.5},
    "intermediate_decision": {"0000": 0.25, "1100": 0.25, "0111": 0.25, "1011": 0.25},
    "postponed_decision": {"0000": 0.5, "1111": 0.5},
}


def jacket_means(v0, v1, c0, c1, d):
    return {
        "nothing": 0.5 * (v0 + v1),
        "jacket": 0.5 * v0 + v1 - c1,
        "umbrella": 0.5 * v1 + v0 - c0,
        "umbrella_and_jacket": v1 + v0 - c0 - c1,
        "intermediate_decision": 0.75 * (v0 + v1) - 0.5 * (c0 + c1) - d,
        "postponed_decision": v1 + v0 - 0.5 * (c0 + c1) - d,
    }


def jacket_sigmas(v0, v1, c0, c1, d):
    V, C = v0 + v1, c0 + c1
    return {
        "nothing": 0.5 * V,
        "jacket": 0.5 * v0,
        "umbrella": 0.5 * v1,
        "umbrella_and_jacket": 0.0,
        "intermediate_decision": 0.5 * math.sqrt(0.75 * V**2 + C**2 - V * C),
        "postponed_decision": 0.5 * C,
    }
