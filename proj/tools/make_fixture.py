"""Generates the bundled synthetic corpus under data/fixture.

Deterministic for a given --seed. Daily escalation intensity follows a smooth
hidden curve; escalation vocabulary is drawn in proportion to it and the event
counts follow the same curve seven days later.
"""
import argparse
import json
import math
import random
from datetime import datetime, timedelta, timezone
from pathlib import Path

START = datetime(2025, 6, 1, tzinfo=timezone.utc)
DAYS = 60
EVENT_LAG = 7

CHANNELS = ["iranintl_fa", "manoto_news", "radiofarda", "bbcpersian", "tasnim_en", "farsna_en"]
SUBREDDITS = ["iran", "NewIran", "geopolitics", "worldnews"]

TOPICS = {
    "nuclear": "uranium enrichment centrifuge fordow natanz reactor inspectors iaea stockpile weapons program".split(),
    "military": "missile strike drone airstrike troops base defense radar launch interception".split(),
    "diplomacy": "talks negotiation envoy sanctions deal ceasefire ministers summit proposal mediation".split(),
    "protest": "protest women freedom students strike rally arrests regime crackdown activists".split(),
    "economy": "rial inflation prices oil exports currency market salaries bread unemployment".split(),
    "monarchy": "pahlavi prince monarchy referendum transition constitution future exile opposition".split(),
}
ENTITY_PHRASES = {
    "nuclear": ["the IAEA", "Iran", "Fordow", "Natanz", "Tehran"],
    "military": ["Israel", "the IDF", "the IRGC", "Iran", "the U.S."],
    "diplomacy": ["Qatar", "Washington", "Tehran", "Trump", "Russia"],
    "protest": ["Tehran", "the Islamic Republic", "Khamenei", "Iran"],
    "economy": ["Iran", "China", "Turkey", "Iraq"],
    "monarchy": ["Reza Pahlavi", "the Shah", "Iran", "America"],
}
ESCALATION_WORDS = ["strike", "missile", "attack", "retaliation", "war", "escalation", "airstrike", "conflict"]
POSITIVE = ["hope", "great", "support", "peaceful", "proud", "good", "brave", "free"]
NEGATIVE = ["terrible", "fear", "killed", "angry", "crisis", "attack", "hate", "sad"]
FILLER = "the a of to in and on for with this that about after today people new report says".split()


def intensity(day):
    # Two escalation waves on top of a low baseline.
    wave = math.exp(-((day - 18) / 4.0) ** 2) + 0.7 * math.exp(-((day - 42) / 5.0) ** 2)
    return 0.08 + 0.6 * wave


def sentence(rng, day, platform):
    topic = rng.choice(list(TOPICS))
    words = rng.sample(TOPICS[topic], 4) + rng.sample(FILLER, 4)
    if rng.random() < 0.7:
        words.append(rng.choice(ENTITY_PHRASES[topic]))
    if rng.random() < 0.5:
        words.append(rng.choice(ENTITY_PHRASES[topic]))
    if rng.random() < intensity(day):
        words += rng.sample(ESCALATION_WORDS, 2)
    tone = rng.random()
    bias = 0.35 if platform == "telegram" else 0.5
    if tone < bias:
        words.append(rng.choice(NEGATIVE))
    elif tone < bias + 0.3:
        words.append(rng.choice(POSITIVE))
    rng.shuffle(words)
    text = " ".join(words)
    text = text[0].upper() + text[1:] + rng.choice([".", "!", "?", "."])
    if rng.random() < 0.1:
        text += f" https://example.org/post/{rng.randrange(10**6)}"
    if rng.random() < 0.05:
        text = text.upper()
    if rng.random() < 0.03:
        text += " سلام ایران"
    return text


def timestamp(rng, day):
    return int((START + timedelta(days=day, seconds=rng.randrange(86400))).timestamp())


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--seed", type=int, default=20250601)
    ap.add_argument("--out", type=Path, default=Path(__file__).resolve().parent.parent / "data" / "fixture")
    args = ap.parse_args()
    rng = random.Random(args.seed)
    args.out.mkdir(parents=True, exist_ok=True)

    telegram, reddit = [], []
    for day in range(DAYS):
        for _ in range(10):
            telegram.append({
                "id": len(telegram) + 1,
                "platform": "telegram",
                "source": rng.choice(CHANNELS),
                "created_utc": timestamp(rng, day),
                "text": sentence(rng, day, "telegram"),
            })
        for _ in range(7 if day < 40 else 6):
            kind = "post" if rng.random() < 0.4 else "comment"
            reddit.append({
                "id": f"r{len(reddit) + 1:05d}",
                "platform": "reddit",
                "source": rng.choice(SUBREDDITS),
                "kind": kind,
                "created_utc": timestamp(rng, day),
                "text": sentence(rng, day, "reddit"),
            })

    with open(args.out / "telegram.jsonl", "w", encoding="utf-8") as f:
        for i, m in enumerate(telegram):
            f.write(json.dumps(m, ensure_ascii=False) + "\n")
            if i == 100:
                f.write(json.dumps(m, ensure_ascii=False) + "\n")  # duplicate id
            if i == 200:
                f.write('{"id": 99999, "platform": "telegram", "text": "missing fields"\n')
            if i == 300:
                f.write("\n")
    with open(args.out / "reddit.jsonl", "w", encoding="utf-8") as f:
        for m in reddit:
            f.write(json.dumps(m, ensure_ascii=False) + "\n")

    with open(args.out / "events.csv", "w") as f:
        f.write("date,count\n")
        for day in range(DAYS):
            src = day - EVENT_LAG
            level = intensity(src) if src >= 0 else intensity(0)
            count = max(0, round(40 * level + rng.gauss(0, 0.6)))
            f.write(f"{(START + timedelta(days=day)).date().isoformat()},{count}\n")

    print(f"telegram={len(telegram)} reddit={len(reddit)}")


if __name__ == "__main__":
    main()
