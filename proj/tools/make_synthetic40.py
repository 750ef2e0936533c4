"""Writes the 40-item synthetic fixture (dataset + scripted predictions).

Item groups (1-based ids s01..s40):
  A  s01-s16  answer in most similar sentence, k2 prediction correct
  B  s17-s24  answer in most similar sentence, k2 prediction wrong
  C  s25-s30  answer elsewhere, k2 prediction correct
  D  s31-s40  answer elsewhere, k2 prediction wrong  -> hard
Full-question predictions: A, C correct; B s17-s20 correct, s21-s24 half
right (F1 0.5); D s31-s35 correct, s36-s40 wrong. sim_only predictions are
correct for A and B. Expected aggregates are in expected.json.
"""
import json
import pathlib
import sys

ANIMALS = ["heron", "otter", "lynx", "falcon", "badger", "marten", "ibis", "puffin", "stoat", "crane",
           "plover", "beaver", "gecko", "tapir", "okapi", "quokka", "dingo", "serval", "kestrel", "bison",
           "walrus", "narwhal", "jackal", "osprey", "pelican", "condor", "ferret", "lemur", "macaw", "gibbon",
           "koala", "wombat", "ocelot", "caracal", "egret", "avocet", "curlew", "dunlin", "shrike", "wren"]
PLACES = ["Arden", "Brisk", "Corvo", "Dunmore", "Elsby", "Farrow", "Glenn", "Hollis", "Ivel", "Jarrow",
          "Kessel", "Lorn", "Marlow", "Nesby", "Orlo", "Penrith", "Quarry", "Rusk", "Selby", "Tarn",
          "Ulver", "Varna", "Wexley", "Yarrow", "Zennor", "Ashby", "Bexley", "Calder", "Dorrit", "Erwood",
          "Fenwick", "Garsdale", "Harlow", "Ilkley", "Jesmond", "Kirkby", "Lindley", "Mossley", "Norley", "Otley"]
FIRST = ["Anna", "Boris", "Clara", "Dmitri", "Elena", "Felix", "Greta", "Hugo", "Ingrid", "Jonas"]
LAST = ["Berg", "Castell", "Duval", "Ekman", "Fontaine", "Gruber", "Halvorsen", "Iversen", "Jansen", "Kowal"]
FOODS = ["smoked fish", "honey cakes", "salted nuts", "rye bread", "plum jam", "cheese rolls", "pickled beets",
         "apple cider", "oat biscuits", "fig tarts"]
LANDMARKS = ["old lighthouse", "stone bridge", "market hall", "clock tower", "harbour wall",
             "chapel ruins", "north gate", "river mill", "town well", "signal hill"]


def item(i):
    n = i - 1
    animal, place = ANIMALS[n], PLACES[n]
    person = f"{FIRST[n % 10]} {LAST[(n * 3) % 10]}"
    year = 1850 + n
    food, landmark = FOODS[n % 10], LANDMARKS[(n * 7) % 10]
    context = (f"The {animal} of {place} was first described by {person} in {year}. "
               f"Its bright feathers attract many visitors every spring. "
               f"Local guides sell {food} near the {landmark}.")
    in_sim = i <= 24
    if in_sim:
        question = f"Who first described the {animal} of {place}?"
    else:
        question = f"Who described the creature whose local guides sell {food} near the {landmark}?"
    return {"id": f"s{i:02d}", "style": "extraction", "context": context, "question": question,
            "answers": [person]}, person


def write_preds(path, variant, answers):
    doc = {"header": {"dataset_id": "synthetic40", "variant": variant, "system": "scripted"},
           "predictions": answers}
    path.write_text(json.dumps(doc, indent=1, ensure_ascii=False) + "\n", encoding="utf-8")


def main(out_dir):
    out = pathlib.Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    items, full, k2, sim = [], {}, {}, {}
    for i in range(1, 41):
        rec, person = item(i)
        items.append(rec)
        first = person.split()[0]
        wrong = "nobody knows"
        k2[rec["id"]] = person if (i <= 16 or 25 <= i <= 30) else wrong
        if i <= 20 or 25 <= i <= 35:
            full[rec["id"]] = person
        elif i <= 24:
            full[rec["id"]] = f"{first} Smith"
        else:
            full[rec["id"]] = wrong
        if i <= 24:
            sim[rec["id"]] = person
        else:
            sim[rec["id"]] = wrong
    with open(out / "dataset.jsonl", "w", encoding="utf-8") as f:
        for rec in items:
            f.write(json.dumps(rec, ensure_ascii=False) + "\n")
    write_preds(out / "pred_full.json", "full", full)
    write_preds(out / "pred_k2.json", "k2", k2)
    write_preds(out / "pred_sim_only.json", "sim_only", sim)


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "tests/fixtures/synthetic40")
