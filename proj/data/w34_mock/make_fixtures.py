#!/usr/bin/env python3
"""Builds the bundled mock dataset: a 5-variable demographic scheme, a
6-question ordinal survey, 10 synthetic respondents, and mock-provider rule
files for every stage. Everything here is invented; nothing is real panel data.

The mock rules key on content rather than on presentation order:
  * generate.json   - the natural prompt yields 20 stories in a fixed order
                      (plus one too-short reply that the length filter drops);
  * profile.json    - sampled demographic answers, weighted toward each
                      story's intended traits, keyed on the narrator's name;
  * extract.json    - explicit-mention extraction for sentences that state
                      age, income or education outright, else NOT_MENTIONED;
  * generate_dp.json- demographics-primed stories keyed on the age answer;
  * survey.json     - answers given as option text, weighted by story or by
                      age band, with a small share of unparseable replies.

Run from this directory:  python3 make_fixtures.py
"""

import csv
import json

AGE = ["18-29", "30-49", "50-64", "65+"]
GENDER = ["Male", "Female"]
RACE = ["White", "Black", "Hispanic", "Asian", "Other"]
EDU = ["High school or less", "Some college", "College graduate", "Postgraduate"]
INCOME = ["Less than $30,000", "$30,000 to less than $75,000", "$75,000 or more"]

SCHEME = {
    "wave_tag": "W34-mock",
    "variables": [
        {"id": "age", "question": "What is your age?", "options": AGE, "kind": "ordinal",
         "extraction_eligible": True, "bio_template": "I am {label} years old."},
        {"id": "gender", "question": "What is your gender?", "options": GENDER, "kind": "nominal",
         "extraction_eligible": False, "bio_template": "My gender is {label}."},
        {"id": "race", "question": "Which of these best describes your race or ethnicity?", "options": RACE,
         "kind": "nominal", "extraction_eligible": False,
         "bio_template": "My race or ethnicity is {label}."},
        {"id": "education", "question": "What is the highest level of school you have completed?",
         "options": EDU, "kind": "ordinal", "extraction_eligible": True,
         "bio_template": "The highest level of school I have completed is: {label}."},
        {"id": "income", "question": "Last year, what was your total family income from all sources?",
         "options": INCOME, "kind": "ordinal", "extraction_eligible": True,
         "bio_template": "Last year my total family income was {label}."},
    ],
}

AGREE = ["Strongly agree", "Somewhat agree", "Neither agree nor disagree", "Somewhat disagree",
         "Strongly disagree"]
QUESTIONS = [
    ("TRUST", "How much do you trust medical researchers to act in the best interests of the public?",
     ["A great deal", "A fair amount", "Not too much", "Not at all"]),
    ("TECH", "Has new technology made life better or worse for people like you?",
     ["Much better", "Somewhat better", "About the same", "Somewhat worse", "Much worse"]),
    ("FOOD", "How important is it to you that your food is grown without pesticides?",
     ["Very important", "Somewhat important", "Not too important", "Not at all important"]),
    ("NEWS", "How closely do you follow news about scientific discoveries?",
     ["Very closely", "Somewhat closely", "Not very closely", "Not at all closely"]),
    ("FUND", "Agree or disagree: public money spent on basic research pays off in the long run.", AGREE),
    ("SUPP", "Agree or disagree: most people should take dietary supplements to stay healthy.", AGREE),
]
SURVEY = {
    "id": "W34-mock-science",
    "questions": [{"id": qid, "text": text, "options": opts, "scale": "likert_reversible"}
                  for qid, text, opts in QUESTIONS],
}

# name, age, gender, race, edu, income, explicit facts, color, "lean" in [0, 1]
# (0 = science-skeptical, 1 = science-enthusiast)
STORIES = [
    ("Harold", 3, 0, 0, 0, 1, {"age": "I am 71 years old"}, "I spent forty years on the railroad and now I fix clocks in my garage.", 0.3),
    ("Maria", 1, 1, 2, 1, 1, {}, "I run a small bakery with my sister and get up at four every morning to start the ovens.", 0.5),
    ("Devon", 0, 0, 1, 1, 0, {"income": "we get by on less than $30,000 a year"}, "I am finishing a welding certificate at night and working at a warehouse during the day.", 0.6),
    ("Grace", 2, 1, 0, 3, 2, {"education": "I earned a doctorate in chemistry"}, "I worked in a pharmaceutical lab for most of my career and still referee journal articles.", 0.95),
    ("Tomas", 1, 0, 2, 0, 1, {}, "I drive a delivery route through the valley and coach my son's soccer team on weekends.", 0.35),
    ("Linh", 0, 1, 3, 2, 1, {"age": "I am 26 years old"}, "I design interfaces for a health app and spend my evenings climbing at the gym.", 0.85),
    ("Earl", 3, 0, 1, 0, 0, {}, "I was a church deacon for thirty years, and my grandchildren visit me every Sunday after the service.", 0.2),
    ("Priya", 1, 1, 3, 3, 2, {"income": "our household makes well over $75,000"}, "I am a pediatrician and my husband teaches high school physics.", 0.9),
    ("Walt", 2, 0, 0, 1, 1, {}, "I farm soybeans and corn on land my grandfather cleared, and I worry about the weather every spring.", 0.25),
    ("Keisha", 1, 1, 1, 2, 1, {"education": "I graduated from college with a nursing degree"}, "I work night shifts in an emergency room and raise two daughters on my own.", 0.7),
    ("Rosa", 3, 1, 2, 0, 0, {}, "I cleaned offices downtown for decades and now I keep a garden full of tomatoes and peppers.", 0.3),
    ("Ben", 0, 0, 0, 2, 2, {}, "I write software for a trading firm and read about space exploration whenever I can.", 0.9),
    ("Aiyana", 2, 1, 4, 1, 1, {"age": "I am 58 years old"}, "I teach weaving at the community center and sit on the tribal health board.", 0.45),
    ("Frank", 2, 0, 0, 2, 2, {}, "I managed a hardware store chain before selling it and now I sail on the lake most summers.", 0.55),
    ("Mei", 3, 1, 3, 3, 2, {"education": "I hold a master's degree in library science"}, "I was a university librarian and I still volunteer teaching English to new immigrants.", 0.75),
    ("Luis", 0, 0, 2, 0, 0, {}, "I work construction with my uncle and send money home to my mother every month.", 0.4),
    ("Janet", 2, 1, 0, 1, 1, {}, "I do the books for three small businesses and knit sweaters for my church's winter drive.", 0.35),
    ("Omar", 1, 0, 1, 3, 2, {}, "I am an engineer at a water utility and I spend weekends restoring an old motorcycle.", 0.8),
    ("Sadie", 0, 1, 0, 1, 0, {"age": "I am 22 years old"}, "I wait tables at a diner and I am saving up to study veterinary medicine one day.", 0.6),
    ("George", 3, 0, 0, 2, 1, {}, "I taught middle school history until I retired, and I still read two newspapers every morning.", 0.65),
]
SHORT_REPLY = "I would rather not say."


def story_text(s):
    name, age, gender, race, edu, income, facts, detail, lean = s
    parts = [f"My name is {name}.", detail]
    for key in ("age", "income", "education"):
        if key in facts:
            parts.append(facts[key][0].upper() + facts[key][1:] + ".")
    parts.append("I try to stay close to the people I love, and I think a lot about what kind of world "
                 "we are leaving for the next generation.")
    if lean > 0.6:
        parts.append("I trust careful research and I like reading about new discoveries.")
    elif lean < 0.4:
        parts.append("I am wary of experts who have never had to live the way we do.")
    return " ".join(parts)


def label(i):
    return "(" + chr(ord("A") + i) + ")"


def peaked(options, true_index, mass=0.7):
    # True option gets `mass`; neighbours share most of the rest; a sliver of
    # answers are unparseable so parse failures show up in the bookkeeping.
    weights = {}
    rest = 1.0 - mass - 0.025
    neighbours = [j for j in (true_index - 1, true_index + 1) if 0 <= j < len(options)]
    others = [j for j in range(len(options)) if j != true_index and j not in neighbours]
    for j in range(len(options)):
        if j == true_index:
            w = mass
        elif j in neighbours:
            w = rest * (0.8 if others else 1.0) / len(neighbours)
        else:
            w = rest * 0.2 / len(others)
        # Alternate between label-only and label-plus-text replies.
        key = f" {label(j)} {options[j]}" if j % 2 == 0 else f" {label(j)}"
        weights[key] = round(w, 6)
    weights[" I don't know."] = 0.025
    return weights


def survey_weights(options, lean):
    # Position 0 is the most science-favourable end of every scale here,
    # except SUPP where enthusiasm for research means disagreeing.
    m = len(options)
    centre = (1.0 - lean) * (m - 1)
    raw = [max(0.02, 1.0 - abs(k - centre) / 1.5) for k in range(m)]
    total = sum(raw)
    weights = {options[k]: round(0.97 * raw[k] / total, 6) for k in range(m)}
    weights["I'm not sure."] = 0.03
    return weights


def escape(s):
    out = ""
    for c in s:
        out += "\\" + c if c in r"\^$.|?*+()[]{}" else c
    return out


def rule_contains_and_tail(needles, question_text, payload):
    return {"match": {"contains": needles, "regex": "^ " + escape(question_text), "after_last": "Question:"},
            **payload}


def main():
    stories = [story_text(s) for s in STORIES]
    for s in stories:
        assert len(s) >= 200, (len(s), s)

    responses = stories[:5] + [SHORT_REPLY] + stories[5:]
    generate = {"model": "mock-base", "seed": 34,
                "rules": [{"match": {"exact": "Question: Tell me about yourself.\n\nAnswer:"},
                           "responses": [" " + r for r in responses]}]}

    profile_rules = []
    for s in STORIES:
        name, *traits = s[:6]
        for var, t in zip(SCHEME["variables"], traits):
            profile_rules.append(rule_contains_and_tail([f"My name is {name}."], var["question"],
                                                        {"weighted": peaked(var["options"], t)}))
    profile = {"model": "mock-base", "seed": 35, "rules": profile_rules}

    extract_rules = []
    for s in STORIES:
        facts = s[6]
        for key, sentence in facts.items():
            var = next(v for v in SCHEME["variables"] if v["id"] == key)
            idx = {"age": s[1], "education": s[4], "income": s[5]}[key]
            extract_rules.append(rule_contains_and_tail([sentence[0].upper() + sentence[1:]], var["question"],
                                                        {"responses": [label(idx)]}))
    extract_rules.append({"match": {"contains": ["NOT_MENTIONED"]}, "responses": ["NOT_MENTIONED"]})
    extract = {"model": "mock-instruct", "seed": 36, "rules": extract_rules}

    dp_rules = []
    for a, band in enumerate(AGE):
        lean = [0.7, 0.6, 0.45, 0.35][a]
        text = (f"I am in the {band} age group. I have lived in the same region most of my life and the "
                "people around me shaped how I see the world. I work hard, I look after my family, and "
                "I have opinions about where the country is heading that I am not shy about sharing.")
        if lean > 0.5:
            text += " I like to read about new discoveries."
        dp_rules.append({"match": {"contains": [f"Answer: {label(a)} {band}"]}, "responses": [text]})
        dp_rules.append({"match": {"contains": [f"I am {band} years old."]}, "responses": [text]})
    generate_dp = {"model": "mock-instruct", "seed": 37, "rules": dp_rules}

    survey_rules = []
    for qid, qtext, options in QUESTIONS:
        sign = -1 if qid == "SUPP" else 1
        def lean_for(x):
            return x if sign > 0 else 1.0 - x
        for s in STORIES:
            survey_rules.append(rule_contains_and_tail([f"My name is {s[0]}."], qtext,
                                                       {"weighted": survey_weights(options, lean_for(s[8]))}))
        for a, band in enumerate(AGE):
            lean = [0.7, 0.6, 0.45, 0.35][a]
            for marker in (f"Answer: {label(a)} {band}", f"I am {band} years old."):
                survey_rules.append(rule_contains_and_tail([marker], qtext,
                                                           {"weighted": survey_weights(options, lean_for(lean))}))
        survey_rules.append({"match": {"regex": "^ " + escape(qtext), "after_last": "Question:"},
                             "weighted": survey_weights(options, 0.5)})
    survey_mock = {"model": "mock-base", "seed": 38, "rules": survey_rules}

    humans = [
        # id, age, gender, race, edu, income, answers (option text per question; "Refused" is missing)
        ("R01", 0, 1, 0, 2, 1, ["A fair amount", "Much better", "Somewhat important", "Somewhat closely", "Strongly agree", "Somewhat disagree"]),
        ("R02", 0, 0, 1, 1, 0, ["Not too much", "Somewhat better", "Very important", "Not very closely", "Somewhat agree", "Neither agree nor disagree"]),
        ("R03", 1, 1, 2, 1, 1, ["A fair amount", "Somewhat better", "Very important", "Somewhat closely", "Somewhat agree", "Somewhat agree"]),
        ("R04", 1, 0, 0, 3, 2, ["A great deal", "Much better", "Not too important", "Very closely", "Strongly agree", "Strongly disagree"]),
        ("R05", 1, 1, 3, 2, 2, ["A great deal", "Somewhat better", "Somewhat important", "Somewhat closely", "Strongly agree", "Somewhat disagree"]),
        ("R06", 2, 0, 0, 0, 1, ["Not too much", "About the same", "Very important", "Not very closely", "Neither agree nor disagree", "Somewhat agree"]),
        ("R07", 2, 1, 1, 1, 0, ["A fair amount", "Somewhat worse", "Very important", "Not at all closely", "Somewhat agree", "Strongly agree"]),
        ("R08", 3, 0, 0, 2, 1, ["A fair amount", "About the same", "Somewhat important", "Somewhat closely", "Somewhat agree", "Refused"]),
        ("R09", 3, 1, 2, 0, 0, ["Not at all", "Somewhat worse", "Very important", "Not very closely", "Somewhat disagree", "Somewhat agree"]),
        ("R10", 3, 0, 0, 1, 1, ["Not too much", "About the same", "Somewhat important", "Very closely", "Neither agree nor disagree", "Neither agree nor disagree"]),
    ]

    with open("scheme.json", "w") as f:
        json.dump(SCHEME, f, indent=2)
        f.write("\n")
    with open("survey.json", "w") as f:
        json.dump(SURVEY, f, indent=2)
        f.write("\n")
    with open("humans.csv", "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["respondent_id", "age", "gender", "race", "education", "income"] + [q[0] for q in QUESTIONS])
        for hid, a, g, r, e, i, answers in humans:
            w.writerow([hid, AGE[a], GENDER[g], RACE[r], EDU[e], INCOME[i]] + answers)
    for fname, doc in [("mock_generate.json", generate), ("mock_profile.json", profile),
                       ("mock_extract.json", extract), ("mock_generate_dp.json", generate_dp),
                       ("mock_survey.json", survey_mock)]:
        with open(fname, "w") as f:
            json.dump(doc, f, indent=1)
            f.write("\n")


if __name__ == "__main__":
    main()
