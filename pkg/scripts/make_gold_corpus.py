"""Write a seeded corpus of gold-segmented scripts for the segmentation study.

Each script strings together 2 to 4 topics; each topic contributes a subgoal
and 2 to 4 steps drawn from its own sentence bank.  Run from the repository
root:

    python3 scripts/make_gold_corpus.py
"""

import json
import random
from pathlib import Path

OUT = Path(__file__).resolve().parents[1] / "src" / "hiscript" / "data" / "gold_scripts.jsonl"
N_SCRIPTS = 120
SEED = 20221

TOPICS = {
    "prepare the workspace": [
        "Clear the bench of old scraps",
        "Sweep sawdust off the floor",
        "Lay a drop cloth under the bench",
        "Open a window for fresh air",
        "Put tools within easy reach",
        "Plug in the shop light",
    ],
    "measure the boards": [
        "Measure each board with a tape",
        "Mark the length with a pencil",
        "Check the mark against a square",
        "Measure twice before any cut",
        "Label each board by its length",
    ],
    "cut the pieces": [
        "Clamp the board to the sawhorse",
        "Cut along the pencil line slowly",
        "Saw the second board to length",
        "Trim rough ends with a fine saw",
        "Stack cut pieces by size",
    ],
    "sand the surfaces": [
        "Sand every face with coarse paper",
        "Switch to fine sandpaper for smoothness",
        "Sand along the grain gently",
        "Wipe sanding dust with a tack cloth",
    ],
    "glue the joints": [
        "Spread wood glue on both joint faces",
        "Press the joint firmly together",
        "Clamp the joint while glue sets",
        "Wipe squeezed glue with a damp rag",
    ],
    "apply the finish": [
        "Brush a thin coat of varnish",
        "Let the varnish dry overnight",
        "Rub the dried coat with steel wool",
        "Brush a second coat of varnish",
    ],
    "mix the dough": [
        "Whisk flour and salt in a bowl",
        "Pour warm water into the flour",
        "Knead dough until smooth and elastic",
        "Cover dough with a towel to rise",
        "Punch down risen dough",
    ],
    "bake the loaf": [
        "Preheat oven to four hundred degrees",
        "Shape dough into a round loaf",
        "Slash the loaf top with a blade",
        "Bake loaf until crust turns brown",
        "Cool baked bread on a rack",
    ],
    "make the sauce": [
        "Simmer crushed tomatoes in a pot",
        "Stir minced garlic into tomatoes",
        "Season sauce with basil and pepper",
        "Reduce sauce until thick",
    ],
    "wire the circuit": [
        "Insert resistor into breadboard row",
        "Connect LED anode to resistor lead",
        "Run jumper wire to ground rail",
        "Attach battery clip to power rail",
        "Check wiring against the schematic",
    ],
    "solder the board": [
        "Heat soldering iron to working temperature",
        "Tin soldering iron tip",
        "Solder each component pin to pad",
        "Clip excess leads with flush cutters",
    ],
    "test the device": [
        "Switch device power on",
        "Measure voltage with a multimeter",
        "Press button to test response",
        "Note any fault in a logbook",
    ],
    "plant the seeds": [
        "Fill seed trays with potting mix",
        "Press seeds into moist soil",
        "Water seedlings with a fine mist",
        "Set seed trays on sunny windowsill",
    ],
    "build the garden bed": [
        "Dig out grass from bed area",
        "Loosen subsoil with garden fork",
        "Shovel compost onto loosened soil",
        "Rake bed surface level",
    ],
    "sew the seams": [
        "Pin fabric pieces right sides together",
        "Stitch seam with sewing machine",
        "Press seam open with an iron",
        "Trim loose threads at each seam",
    ],
    "paint the walls": [
        "Tape edges along ceiling trim",
        "Roll primer onto bare drywall",
        "Paint corners with angled brush",
        "Roll second paint coat evenly",
    ],
}

GOALS = [
    "How to Build a Bookshelf", "How to Bake Bread at Home", "How to Build a Blinking Light",
    "How to Start a Vegetable Garden", "How to Sew a Pillow Cover", "How to Refresh a Bedroom",
    "How to Make a Pizza", "How to Build a Toy Box", "How to Make a Circuit Badge",
    "How to Make a Planter",
]


def main():
    rng = random.Random(SEED)
    names = sorted(TOPICS)
    OUT.parent.mkdir(parents=True, exist_ok=True)
    with open(OUT, "w", encoding="utf-8", newline="\n") as fh:
        for i in range(N_SCRIPTS):
            n_seg = rng.choice((2, 3, 3, 4))
            topics = rng.sample(names, n_seg)
            segments = []
            for t in topics:
                k = rng.randint(2, min(4, len(TOPICS[t])))
                steps = rng.sample(TOPICS[t], k)
                segments.append({
                    "subgoal": t,
                    "steps": steps,
                })
            rec = {
                "source_id": f"gold-{i:03d}",
                "goal": GOALS[i % len(GOALS)],
                "category": "synthetic",
                "segments": segments,
            }
            fh.write(json.dumps(rec, ensure_ascii=False) + "\n")


if __name__ == "__main__":
    main()
