"""Freezes reference VADER scores for the sentiment parity fixture.

Requires the vaderSentiment package (3.3.2). Rounding inside polarity_scores
is disabled so the stored values carry full precision.
"""
import argparse
from pathlib import Path

import vaderSentiment.vaderSentiment as vs

SENTENCES = [
    "The talks in Doha were a great success.",
    "Missile strikes killed dozens of civilians overnight.",
    "I am not happy with the new sanctions.",
    "This deal is VERY good for ordinary people.",
    "The regime is terrible but the people are brave.",
    "What a wonderful day for freedom!!!",
    "Is this really a ceasefire?",
    "The protests were peaceful and hopeful.",
    "Prices keep rising and everyone is angry.",
    "The envoy said nothing new.",
    "They are extremely worried about a wider war.",
    "Not bad at all, the negotiations are moving.",
    "The attack was horrible, absolutely horrible.",
    "Hope is returning to the streets of Tehran.",
    "No one trusts the official statement.",
    "The strike was barely effective.",
    "I love how brave these students are!",
    "The economy is collapsing and people are starving.",
    "Reza Pahlavi called for a peaceful transition.",
    "This is the worst crisis in decades.",
    "The inspectors were somewhat satisfied with access.",
    "Retaliation would be a disaster for everyone.",
    "The agreement is good, but the details are bad.",
    "GREAT news from the negotiations today!",
    "Nobody wants another war.",
    "The bombing was not justified.",
    "Support for the opposition is growing quickly.",
    "They failed to protect the embassy.",
    "It was a tragic and painful week.",
    "The ministers met in Geneva on Tuesday.",
    "Never so happy to see a deal signed.",
    "I really hate the censorship of the internet.",
    "The currency lost half its value, a total catastrophe.",
    "Activists were arrested and beaten.",
    "This is fine.",
    "The drones were intercepted successfully.",
    "What a disgrace!",
    "People are hopeful, yet fearful of what comes next.",
    "They won't accept the unfair deal.",
    "The speech was incredibly inspiring and powerful.",
    "Threats and intimidation will not silence women.",
    "The truce seems fragile but real.",
    "Celebrations erupted after the announcement!!",
    "The report was accurate and fair.",
    "Isn't this a dangerous escalation?",
    "Our hearts are broken for the victims.",
    "The leaders praised the cooperation.",
    "Without doubt this is a victory for diplomacy.",
    "Everyone is tired of lies and corruption.",
    "",
]


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", type=Path,
                    default=Path(__file__).resolve().parent.parent / "tests" / "fixtures" / "vader_parity.tsv")
    args = ap.parse_args()
    vs.round = lambda x, n=None: x
    analyzer = vs.SentimentIntensityAnalyzer()
    args.out.parent.mkdir(parents=True, exist_ok=True)
    with open(args.out, "w", encoding="utf-8") as f:
        f.write("text\tcompound\tpos\tneu\tneg\n")
        for s in SENTENCES:
            r = analyzer.polarity_scores(s)
            f.write(f"{s}\t{r['compound']!r}\t{r['pos']!r}\t{r['neu']!r}\t{r['neg']!r}\n")


if __name__ == "__main__":
    main()
