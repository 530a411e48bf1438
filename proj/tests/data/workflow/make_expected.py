"""Applies the 11 demo workflow steps to the demo corpus by hand, without
the toolkit, and writes the expected output corpus."""
import copy
import json
import os
import sys

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "..", "..", "data", "demo"))
from make_corpus import corpus, classes, predicates, C, P, vr  # noqa: E402

out = copy.deepcopy(corpus)
out_classes = list(classes)

# 1. rename lamp -> lamp post, add toy (ids unchanged, toy appended).
out_classes[C["lamp"]] = "lamp post"
out_classes.append("toy")
TOY = len(out_classes) - 1

# 2. step02.txt
out["demo_01.jpg"][0]["subject"] = {"category": C["speaker"], "bbox": [110, 390, 60, 140]}

# 3. bear -> teddy bear inside demo_03 and demo_04 only.
out["demo_03.jpg"][0]["subject"]["category"] = C["teddy bear"]
out["demo_03.jpg"][1]["object"]["category"] = C["teddy bear"]
out["demo_04.jpg"][0]["subject"]["category"] = C["teddy bear"]

# 4. plane merged into airplane ("plane" stays in the list, retired).
out["demo_02.jpg"][0]["subject"]["category"] = C["airplane"]

# 5. remove (dog, has, boat) everywhere: demo_05's only VR.
out["demo_05.jpg"] = []

# 6. drop empty entries.
del out["demo_05.jpg"]
del out["demo_07.jpg"]

# 7. step07.txt
del out["demo_08.jpg"][2]
out["demo_08.jpg"].append(vr("person", [100, 400, 50, 150], "hold", "cup", [230, 270, 125, 155]))
out["demo_03.jpg"][1]["object"]["category"] = TOY

# 8. step08.txt
out["demo_09.jpg"][1]["predicate"] = P["on"]
out["demo_02.jpg"][2]["object"]["bbox"] = [255, 415, 305, 695]

# 9. (person, walk, street) -> (person, walk on, street)
out["demo_06.jpg"][0]["predicate"] = P["walk on"]
out["demo_06.jpg"][1]["predicate"] = P["walk on"]

# 10. dedup, first occurrence survives.
del out["demo_06.jpg"][1]
del out["demo_08.jpg"][1]

# 11. step11.txt
out["demo_10.jpg"].append(vr("person", [100, 400, 50, 150], "walk on", "road", [400, 600, 0, 800]))
del out["demo_01.jpg"][1]

with open("expected_annotations.json", "w", encoding="utf-8") as f:
    json.dump(out, f, indent=1, sort_keys=True)
    f.write("\n")
with open("expected_classes.json", "w", encoding="utf-8") as f:
    json.dump(out_classes, f, indent=1)
    f.write("\n")
