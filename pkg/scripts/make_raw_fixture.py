"""Write the 50-project ingestion fixture and its expected-decision manifest.

Every expectation below is declared by hand from the filtering rules, not by
running the filter.  Run from the repository root:

    python3 scripts/make_raw_fixture.py
"""

import json
from pathlib import Path

OUT = Path(__file__).resolve().parents[1] / "src" / "hiscript" / "data"

LONG_STORY = (
    "When I was a kid my grandfather kept a small workshop behind the house and I spent "
    "most of my summers there watching him fix old radios and bicycles for the neighbors. "
    "He never threw anything away and every drawer was full of screws, springs, bits of "
    "wire and mysterious parts that he said would be useful one day. Years later I found "
    "one of his notebooks in a box in the attic and it was full of sketches of things he "
    "had always wanted to build but never had the time for. This project is my attempt to "
    "finish one of those sketches, a little wooden machine that he drew on a rainy "
    "afternoon in the spring. It took me a long time to figure out what some of his notes "
    "meant, because his handwriting was hard to read and he used a lot of abbreviations. "
    "I asked my mother and my uncle for help and together we pieced the design back "
    "together over many weekends. I hope you enjoy building it as much as we enjoyed "
    "remembering him while we worked on it in the garage with the radio playing softly "
    "and the dog sleeping by the door."
)


def words(n, seed_word="plank"):
    base = ("Sand the " + seed_word + " and wipe away the dust before you start the next coat").split()
    out = []
    while len(out) < n:
        out.extend(base)
    text = " ".join(out[:n])
    return text[0].upper() + text[1:] + "."


def proj(pid, title, category, sections, accept=True, reasons=(), transformations=None, goal=None, note=""):
    rec = {
        "id": pid,
        "title": title,
        "category": category,
        "sections": [{"name": n, "body": b} for n, b in sections],
    }
    exp = {"id": pid, "accepted": accept, "reasons": list(reasons)}
    if transformations is not None:
        exp["transformations"] = list(transformations)
    if goal is not None:
        exp["goal"] = goal
    if note:
        exp["note"] = note
    return rec, exp


P = []

# title normalization cases
P.append(proj("p01", "Kung Pao Tofu", "Cooking", [
    ("Prepare the Tofu", "Press the tofu between two towels for ten minutes. Cut it into small cubes."),
    ("Make the Sauce", "Whisk soy sauce, vinegar and sugar in a bowl. Add a spoon of cornstarch and stir well."),
    ("Cook Everything", "Fry the tofu until it turns golden. Pour in the sauce and toss with roasted peanuts."),
], transformations=["TITLE_NORMALIZED"], goal="How to make Kung Pao Tofu", note="noun phrase title"))
P.append(proj("p02", "Build a Toy Rocket", "Workshop", [
    ("Cut the Body", "Cut a cardboard tube to the length you want. Sand both ends so they are flat."),
    ("Add the Fins", "Trace three fins on thin plywood. Glue the fins evenly around the base of the tube."),
    ("Fit the Nose Cone", "Shape a cone from foam. Push the cone into the top of the tube and tape it in place."),
], transformations=["TITLE_NORMALIZED"], goal="How to Build a Toy Rocket", note="verb phrase title"))
P.append(proj("p03", "How to Create a Puppet", "Craft", [
    ("Sew the Body", "Fold the felt in half and trace the outline of your hand. Sew along the line and turn it inside out."),
    ("Add a Face", "Glue two buttons on for the eyes. Stitch a smile below them with red thread."),
], transformations=[], goal="How to Create a Puppet", note="how-to title kept"))

# section number stripping, including the quoted example
P.append(proj("p04", "Sketch a Simple Landscape", "Craft", [
    ("section 1: plan the scene", "Pick a view from a window or a photo. Decide where the horizon will sit on the page."),
    ("section 2: block the shapes", "Mark the big shapes of hills and trees lightly. Keep the pencil loose at this stage."),
    ("section 3: draw a line", "Draw a line along the horizon with a ruler. Darken it gently so it reads clearly."),
], transformations=["SECTION_NUMBER_STRIPPED", "TITLE_NORMALIZED"], goal="How to Sketch a Simple Landscape",
    note="section 3: draw a line -> draw a line"))
P.append(proj("p05", "How to Wire a Doorbell", "Circuits", [
    ("Step 1: Turn Off the Power", "Switch off the breaker that feeds the old bell. Check the wires with a tester."),
    ("Step 2: Connect the Button", "Strip the ends of the bell wire. Wrap each end around a screw on the button."),
    ("Step 3: Test It", "Turn the power back on. Press the button and listen for the chime."),
], transformations=["SECTION_NUMBER_STRIPPED"]))

# supplies / materials removal
P.append(proj("p06", "How to Make a Bird Feeder", "Outside", [
    ("Supplies", "A plastic bottle, two wooden spoons, string and bird seed."),
    ("Cut the Holes", "Cut two small holes on opposite sides of the bottle. Push a spoon through both holes."),
    ("Fill and Hang", "Pour the seed into the bottle. Tie the string around the neck and hang it from a branch."),
], transformations=["SUPPLIES_REMOVED"], note="Supplies section dropped"))
P.append(proj("p07", "Knit a Scarf", "Craft", [
    ("Materials", "Two balls of wool and a pair of size eight needles."),
    ("Cast On", "Make a slip knot on one needle. Cast on thirty stitches loosely."),
    ("Knit the Rows", "Knit every row until the scarf is as long as you like. Bind off and weave in the ends."),
], transformations=["SUPPLIES_REMOVED", "TITLE_NORMALIZED"], goal="How to Knit a Scarf"))
P.append(proj("p08", "How to Build a Raised Garden Bed", "Outside", [
    ("What You Need", "Four cedar boards, screws, a drill and garden soil."),
    ("Step 1: Frame the Box", "Lay the boards out in a rectangle. Drive two screws into each corner."),
    ("Step 2: Fill It", "Set the frame in a sunny spot. Fill it with soil and water it well."),
], transformations=["SUPPLIES_REMOVED", "SECTION_NUMBER_STRIPPED"]))

# whitespace / control characters
P.append(proj("p09", "How to Clean a Cast Iron Pan", "Cooking", [
    ("Scrub  It", "Rinse the pan with hot water.\nScrub it with coarse salt and a brush."),
    ("Dry and Oil", "Dry the pan on the stove over low heat.\tRub a thin layer of oil on it."),
], transformations=["WHITESPACE_NORMALIZED"]))
P.append(proj("p10", "How to Set Up a Compost Bin", "Outside", [
    ("Pick a Spot", "Choose a shady corner of the yard.   Level the ground with a rake."),
    ("Layer the Scraps", "Add a layer of dry leaves.\r\nAdd kitchen scraps on top and cover them with soil."),
], transformations=["WHITESPACE_NORMALIZED"]))

# boundary of the overlong rule: exactly 128 words is fine
P.append(proj("p11", "How to Refinish a Table", "Workshop", [
    ("Strip the Old Finish", "Brush stripper over the top. Scrape it off once it bubbles."),
    ("Sand Until Smooth", words(128)),
], transformations=[], note="128-word section accepted"))

# plain accepted projects
PLAIN = [
    ("How to Solder a Wire Joint", "Circuits", [
        ("Prepare the Wires", "Strip a short length of insulation from each wire. Twist the bare strands together."),
        ("Solder the Joint", "Heat the joint with the iron for a few seconds. Feed solder into the joint until it flows."),
        ("Insulate It", "Slide heat shrink tubing over the joint. Warm it with a lighter until it grips."),
    ]),
    ("How to Build a Night Light", "Circuits", [
        ("Lay Out the Circuit", "Place the light sensor and the LED on a breadboard. Add a resistor in series with the LED."),
        ("Wire the Battery", "Connect the battery clip to the power rails. Check that the LED turns on in the dark."),
    ]),
    ("How to Make a Phone Stand", "Workshop", [
        ("Cut the Pieces", "Cut a wide base and a narrow back from scrap wood. Cut a slot at an angle in the base."),
        ("Glue and Finish", "Glue the back into the slot. Sand the edges and rub on some oil."),
    ]),
    ("How to Bake Banana Bread", "Cooking", [
        ("Mix the Batter", "Mash three ripe bananas with a fork. Stir in melted butter, sugar and one egg."),
        ("Add the Flour", "Fold in the flour and baking soda. Pour the batter into a greased loaf pan."),
        ("Bake It", "Bake for an hour at three hundred and fifty degrees. Let it cool before slicing."),
    ]),
    ("How to Fold a Paper Crane", "Craft", [
        ("Make the Base", "Fold a square sheet in half both ways. Collapse it into a small square base."),
        ("Shape the Wings", "Fold the edges to the center line. Pull the wings down and shape the neck."),
    ]),
    ("How to Organize a Closet", "Living", [
        ("Empty It", "Take everything out of the closet. Sort the clothes into keep and donate piles."),
        ("Put It Back", "Hang the clothes by type and color. Put the shoes on a rack at the bottom."),
    ]),
    ("How to Pitch a Tent", "Outside", [
        ("Choose the Ground", "Find a flat spot without rocks or roots. Lay the ground sheet down first."),
        ("Raise the Tent", "Thread the poles through the sleeves. Stake the corners and tighten the guy lines."),
    ]),
    ("How to Build a Bat House", "Outside", [
        ("Cut the Panels", "Cut the front, back and sides from rough plywood. Cut grooves inside the back panel."),
        ("Assemble It", "Screw the sides to the back. Attach the front and leave a gap at the bottom."),
        ("Mount It", "Paint the outside a dark color. Mount it high on a pole facing the sun."),
    ]),
    ("How to Make Lemonade", "Cooking", [
        ("Juice the Lemons", "Roll the lemons on the counter. Cut them in half and squeeze out the juice."),
        ("Mix It", "Stir the juice with sugar and cold water. Add ice and a few mint leaves."),
    ]),
    ("How to Repair a Bike Tube", "Outside", [
        ("Find the Leak", "Pump up the tube and hold it near your ear. Mark the hole with chalk."),
        ("Patch It", "Rough up the area with sandpaper. Press the patch on firmly and wait a minute."),
    ]),
    ("How to Paint a Mug", "Craft", [
        ("Clean the Mug", "Wash the mug with soap and dry it. Wipe it with rubbing alcohol."),
        ("Paint the Design", "Draw your design with paint pens. Bake the mug in the oven to set the paint."),
    ]),
    ("How to Make a Terrarium", "Living", [
        ("Build the Layers", "Pour a layer of pebbles into the jar. Add charcoal and then potting soil."),
        ("Plant It", "Press small plants into the soil. Mist them with water and close the lid."),
    ]),
    ("How to Hang a Shelf", "Living", [
        ("Mark the Wall", "Find the studs with a stud finder. Mark the height with a level and pencil."),
        ("Mount the Brackets", "Drill pilot holes on the marks. Screw the brackets in and set the shelf on top."),
    ]),
    ("How to Build an Arduino Thermometer", "Circuits", [
        ("Connect the Sensor", "Plug the temperature sensor into the breadboard. Wire its data pin to an analog input."),
        ("Upload the Code", "Open the sketch in the editor. Upload it and watch the readings on the serial monitor."),
    ]),
    ("How to Carve a Wooden Spoon", "Workshop", [
        ("Rough Out the Shape", "Draw the spoon outline on a green branch. Split away the waste with a hatchet."),
        ("Hollow the Bowl", "Carve the bowl with a hook knife. Smooth the handle with a straight knife."),
    ]),
    ("How to Make Pancakes", "Cooking", [
        ("Mix the Batter", "Whisk flour, milk and eggs in a bowl. Let the batter rest for five minutes."),
        ("Cook Them", "Heat a pan with a little butter. Pour in the batter and flip when bubbles appear."),
    ]),
    ("How to Sew a Tote Bag", "Craft", [
        ("Cut the Fabric", "Cut two rectangles of canvas. Cut two long strips for the handles."),
        ("Sew It Together", "Sew the rectangles together on three sides. Stitch the handles to the top edge."),
    ]),
    ("How to Deep Clean a Fridge", "Living", [
        ("Empty the Shelves", "Take out all the food. Throw away anything that has gone bad."),
        ("Wash Inside", "Wipe the shelves with warm soapy water. Dry them and put the food back."),
    ]),
    ("How to Build a Birdhouse", "Workshop", [
        ("Cut the Boards", "Cut the walls, floor and roof from a pine board. Drill an entrance hole in the front."),
        ("Nail It Together", "Nail the walls to the floor. Fit the roof on top and nail it down."),
    ]),
    ("How to Start a Campfire", "Outside", [
        ("Gather Fuel", "Collect dry tinder, kindling and larger logs. Keep them in separate piles."),
        ("Light It", "Build a small teepee of kindling over the tinder. Light the tinder and blow gently."),
    ]),
    ("How to Make a Candle", "Craft", [
        ("Melt the Wax", "Melt the wax in a double boiler. Stir in a few drops of scent."),
        ("Pour It", "Hold the wick in the center of a jar. Pour the wax slowly and let it set overnight."),
    ]),
    ("How to Build a Simple Robot", "Circuits", [
        ("Mount the Motors", "Glue two motors to the bottom of a small box. Attach a wheel to each motor."),
        ("Wire the Controller", "Connect the motors to the motor driver. Program the board to drive forward."),
    ]),
    ("How to Brew Cold Coffee", "Cooking", [
        ("Steep the Grounds", "Mix coarse coffee grounds with cold water in a jar. Leave it in the fridge overnight."),
        ("Strain It", "Pour the coffee through a paper filter. Serve it over ice with milk."),
    ]),
    ("How to Repot a Plant", "Living", [
        ("Remove the Plant", "Water the plant a day before. Tip the pot and slide the plant out gently."),
        ("Plant It Again", "Loosen the roots with your fingers. Set the plant in a bigger pot with fresh soil."),
    ]),
    ("How to Make a Kite", "Outside", [
        ("Build the Frame", "Tie two sticks together in a cross. Run string around the ends to make a frame."),
        ("Cover It", "Lay the frame on a plastic bag and cut around it. Tape the edges over the string."),
    ]),
    ("How to Build a Workbench", "Workshop", [
        ("Make the Legs", "Cut four legs from thick lumber. Join them in pairs with short rails."),
        ("Add the Top", "Screw long rails between the pairs. Lay a sheet of plywood on top and screw it down."),
    ]),
    ("How to Build a Tiny Speaker", "Circuits", [
        ("Wire the Amplifier", "Solder the audio jack to the amplifier board. Connect the speaker to the output pins."),
        ("Build the Box", "Glue a small box from thin wood. Mount the speaker behind a hole in the front."),
    ]),
]
for i, (title, cat, secs) in enumerate(PLAIN):
    P.append(proj(f"p{12 + i:02d}", title, cat, secs, transformations=[]))

# --- rejections -------------------------------------------------------------
P.append(proj("r01", "Comment faire un gâteau", "Cooking", [
    ("Préparer la pâte", "Mélanger la farine et le sucre dans un grand bol. Ajouter les oeufs et le lait."),
    ("Cuire le gâteau", "Verser la pâte dans un moule. Faire cuire pendant trente minutes dans le four."),
], accept=False, reasons=["NON_ENGLISH"], note="French"))
P.append(proj("r02", "Cómo hacer una lámpara", "Workshop", [
    ("Cortar la madera", "Corta la madera con una sierra para que tenga la forma de la base. Lija los bordes con cuidado."),
    ("Poner el cable", "Pasa el cable por el agujero del centro. Conecta el portalámparas y pon una bombilla."),
], accept=False, reasons=["NON_ENGLISH"], note="Spanish"))
P.append(proj("r03", "Wie man ein Vogelhaus baut", "Outside", [
    ("Das Holz schneiden", "Schneide die Bretter für die Wände und das Dach zu. Bohre ein Loch in die Vorderseite."),
    ("Das Haus bauen", "Nagle die Wände auf den Boden. Setze das Dach auf und hänge es in einen Baum."),
], accept=False, reasons=["NON_ENGLISH"], note="German"))
P.append(proj("r04", "如何制作风筝", "Outside", [
    ("制作框架", "把两根竹条绑成十字形。用线把四个端点连起来。"),
    ("糊上纸面", "把纸铺在框架上剪好。用胶水把边缘粘牢。"),
], accept=False, reasons=["NON_ENGLISH"], note="Chinese"))
P.append(proj("r05", "How to Restore My Grandfather's Machine", "Workshop", [
    ("The Story", LONG_STORY),
    ("Build It", "Cut the parts from the drawing. Glue them together and let them dry."),
], accept=False, reasons=["OVERLONG_SECTION"], note="200-word section"))
P.append(proj("r06", "How to Polish a Table", "Workshop", [
    ("Prepare", "Wipe the table clean. Let it dry completely."),
    ("Sand Until Smooth", words(129)),
], accept=False, reasons=["OVERLONG_SECTION"], note="129 words is one over the limit"))
P.append(proj("r07", "How to Build a Marble Run", "Craft", [
    ("Plan the Track", "Sketch the track on paper. Cut tubes in half along their length."),
    ("Watch the Video", ""),
], accept=False, reasons=["EMPTY_SECTION"], note="video-only section"))
P.append(proj("r08", "How to Make a Photo Collage", "Craft", [
    ("Pictures", "   "),
    ("Arrange the Photos", "Lay the photos out on a board. Glue them down in rows."),
], accept=False, reasons=["EMPTY_SECTION"], note="whitespace-only section"))
P.append(proj("r09", "How to Build a Toy Rocket", "Workshop", [
    ("Make the Tube", "Roll a sheet of paper around a pencil. Tape the seam closed."),
    ("Launch It", "Slide the tube onto a straw. Blow hard into the straw."),
], accept=False, reasons=["DUPLICATE_ITEM"], note="same item as p02"))
P.append(proj("r10", "Lemonade", "Cooking", [
    ("Squeeze", "Squeeze six lemons into a pitcher. Stir in sugar until it dissolves."),
    ("Chill", "Top up the pitcher with cold water. Chill it for an hour before serving."),
], accept=False, reasons=["DUPLICATE_ITEM"], note="same item as How to Make Lemonade once the title is normalized"))
P.append(proj("r11", "   ", "Living", [
    ("Clean", "Wipe the counter with a damp cloth. Dry it with a towel."),
], accept=False, reasons=["EMPTY_TITLE"], note="blank title"))
P.append(proj("r12", "How to Fix a Lamp", "Circuits", [
    ("Background", LONG_STORY),
    ("Hidden Step", ""),
], accept=False, reasons=["EMPTY_SECTION", "OVERLONG_SECTION"], note="two rules fire, listed in rule order"))


def main():
    OUT.mkdir(parents=True, exist_ok=True)
    recs = [r for r, _ in P]
    exps = [e for _, e in P]
    assert len(recs) == 50, len(recs)
    with open(OUT / "raw_projects.jsonl", "w", encoding="utf-8", newline="\n") as fh:
        for r in recs:
            fh.write(json.dumps(r, ensure_ascii=False) + "\n")
    manifest = {
        "n_projects": len(recs),
        "n_accepted": sum(e["accepted"] for e in exps),
        "n_rejected": sum(not e["accepted"] for e in exps),
        "expected": exps,
    }
    with open(OUT / "raw_projects.manifest.json", "w", encoding="utf-8", newline="\n") as fh:
        json.dump(manifest, fh, ensure_ascii=False, indent=2)
        fh.write("\n")
    print(manifest["n_accepted"], manifest["n_rejected"])


if __name__ == "__main__":
    main()
