"""Print the raw values behind the frozen constants in ``calibration``."""
import json

from . import verify


def main():
    mel = verify.melnikov_values()
    cor = verify.corona_values()
    rev = verify.reverse_fixture()
    out = {
        "melnikov_max_normalized": max(v[3] for v in mel),
        "packing_ratio": {k: v["packing"] for k, v in cor.items()},
        "item_c_max": max(v["item_c"] for v in cor.values()),
        "reverse_measured_c": rev.measured_c,
        "key_cone_ratio": verify.key_cone_fixture(),
    }
    print(json.dumps(out, indent=2, sort_keys=True))


if __name__ == "__main__":
    main()
