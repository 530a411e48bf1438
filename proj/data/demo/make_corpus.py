"""Writes the synthetic 10-image demo corpus used by the 11-step workflow."""
import json

classes = ["person", "shelf", "speaker", "plane", "airplane", "coat", "jacket", "road",
           "street", "bear", "teddy bear", "table", "cup", "dog", "boat", "car", "sky",
           "building", "lamp"]
predicates = ["on", "wear", "walk", "walk on", "sit on", "in", "has", "next to", "above",
              "below", "hold", "behind", "under", "fly", "park on"]
C = {n: i for i, n in enumerate(classes)}
P = {n: i for i, n in enumerate(predicates)}


def vr(s, sb, p, o, ob):
    return {"predicate": P[p],
            "object": {"category": C[o], "bbox": ob},
            "subject": {"category": C[s], "bbox": sb}}


person = [100, 400, 50, 150]
shelf = [300, 450, 0, 300]
coat = [150, 300, 60, 140]
lamp = [0, 80, 100, 160]
road = [400, 600, 0, 800]
plane = [50, 200, 100, 500]
airplane = [250, 420, 300, 700]
table = [300, 500, 100, 600]
bear = [200, 320, 200, 300]
street = [350, 600, 0, 900]
car = [300, 450, 400, 700]
cup = [220, 260, 120, 150]
jacket = [150, 260, 60, 140]

corpus = {
    "demo_01.jpg": [
        vr("person", person, "on", "shelf", shelf),
        vr("person", person, "wear", "coat", coat),
        vr("lamp", lamp, "above", "shelf", shelf),
    ],
    "demo_02.jpg": [
        vr("plane", plane, "above", "road", road),
        vr("airplane", airplane, "on", "road", road),
        vr("person", person, "next to", "airplane", airplane),
    ],
    "demo_03.jpg": [
        vr("bear", bear, "on", "table", table),
        vr("person", person, "hold", "bear", bear),
    ],
    "demo_04.jpg": [
        vr("bear", bear, "sit on", "table", table),
    ],
    "demo_05.jpg": [
        vr("dog", [300, 400, 200, 300], "has", "boat", [250, 500, 0, 800]),
    ],
    "demo_06.jpg": [
        vr("person", person, "walk", "street", street),
        vr("person", person, "walk", "street", street),
        vr("car", car, "on", "street", street),
    ],
    "demo_07.jpg": [],
    "demo_08.jpg": [
        vr("person", person, "wear", "jacket", jacket),
        vr("person", person, "wear", "jacket", jacket),
        vr("person", person, "hold", "cup", cup),
    ],
    "demo_09.jpg": [
        vr("sky", [0, 150, 0, 1000], "above", "building", [100, 500, 200, 800]),
        vr("car", car, "park on", "street", street),
    ],
    "demo_10.jpg": [
        vr("person", person, "on", "road", road),
    ],
}


def dump(path, value):
    with open(path, "w", encoding="utf-8") as f:
        json.dump(value, f, indent=1, sort_keys=True)
        f.write("\n")


if __name__ == "__main__":
    dump("annotations.json", corpus)
    dump("classes.json", classes)
    dump("predicates.json", predicates)
