"""Writes faults.jsonl and clean.jsonl. Each fault fixture breaks exactly one rule."""
import copy
import json
import pathlib

HERE = pathlib.Path(__file__).parent

SYSTEM = ("You can call the functions listed in the tool list. When a call is needed, reply with nothing but a "
          "bracketed call list like [api_name(arg1=value1, arg2=value2)]. If a required parameter is missing, ask "
          "for it. If no function fits the request, say so in plain text.")

WEATHER = {"name": "get_weather_data",
           "description": "Fetches weather data from the Open-Meteo API for the given latitude and longitude.",
           "parameters": {"type": "dict", "properties": {
               "coordinates": {"type": "array", "items": {"type": "float"},
                               "description": "The latitude and longitude of the location."}},
               "required": ["coordinates"]},
           "returns": {"type": "dict", "properties": {
               "temperature": {"type": "float", "description": "Temperature in Celsius."},
               "condition": {"type": "string", "description": "Short weather summary."}}}}
BINOM = {"name": "calc_binomial_probability",
         "description": "Calculates the probability of getting k successes in n trials.",
         "parameters": {"type": "dict", "properties": {
             "n": {"type": "integer", "description": "The number of trials."},
             "k": {"type": "float", "description": "The number of successes."},
             "p": {"type": "float", "description": "The probability of success."}},
             "required": ["n", "k", "p"]},
         "returns": {"type": "dict", "properties": {
             "probability": {"type": "float", "description": "Probability of exactly k successes."}}}}
ALARM = {"name": "set_alarm",
         "description": "Sets an alarm at a given time of day.",
         "parameters": {"type": "dict", "properties": {
             "time": {"type": "string", "pattern": "^[0-2][0-9]:[0-5][0-9]$", "description": "Time as HH:MM."},
             "repeat": {"type": "string", "enum": ["never", "daily", "weekly"], "description": "Repeat schedule."}},
             "required": ["time"]},
         "returns": {"type": "dict", "properties": {
             "alarm_id": {"type": "string", "description": "Identifier of the alarm."},
             "status": {"type": "string", "description": "Outcome."}}}}
CITY = {"name": "find_city",
        "description": "Finds the nearest city to a pair of coordinates.",
        "parameters": {"type": "dict", "properties": {
            "coordinates": {"type": "array", "items": {"type": "float"}, "description": "Latitude and longitude."}},
            "required": ["coordinates"]},
        "returns": {"type": "dict", "properties": {
            "city": {"type": "string", "description": "City name."},
            "country": {"type": "string", "description": "Country name."}}}}
FORECAST = {"name": "get_city_forecast",
            "description": "Returns the forecast for a named city.",
            "parameters": {"type": "dict", "properties": {
                "city": {"type": "string", "description": "City name."},
                "days": {"type": "integer", "description": "Number of days."}},
                "required": ["city"]},
            "returns": {"type": "dict", "properties": {
                "summary": {"type": "string", "description": "Forecast summary."}}}}

TOOLS = [WEATHER, BINOM, ALARM, CITY, FORECAST]


def user(text):
    return {"role": "user", "content": text}


def say(text):
    return {"role": "assistant", "content": text}


def lit(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (int, float, str)):
        return json.dumps(v, ensure_ascii=False)
    if isinstance(v, list):
        return "[" + ", ".join(lit(x) for x in v) + "]"
    return "{" + ", ".join(json.dumps(k, ensure_ascii=False) + ": " + lit(x) for k, x in v.items()) + "}"


def call_string(calls):
    return "[" + ", ".join(c["name"] + "(" + ", ".join(f"{k}={lit(v)}" for k, v in c["arguments"].items()) + ")"
                           for c in calls) + "]"


def call(*calls):
    return {"role": "assistant", "calls": [{"name": n, "arguments": a} for n, a in calls]}


def tool(name, results):
    return {"role": "tool", "payload": {"name": name, "results": results}}


def sample(sid, dialog_type, turns, tools=None):
    return {"sample_id": sid, "system_prompt": SYSTEM, "tools": copy.deepcopy(tools or TOOLS),
            "turns": turns, "dialog_type": dialog_type, "complexity": None, "provenance": {"fixture": True}}


def single(sid, variant=0):
    lat, lon = [(45.4215, -75.6972), (48.8566, 2.3522), (35.6762, 139.6503), (-33.8688, 151.2093)][variant % 4]
    temp = [12.5, 18.0, 21.25, 9.75][variant % 4]
    return sample(sid, "single", [
        user(f"What is the weather at latitude {lat} and longitude {lon}?"),
        call(("get_weather_data", {"coordinates": [lat, lon]})),
        tool("get_weather_data", {"temperature": temp, "condition": "cloudy"}),
        say(f"It is {temp} degrees Celsius and cloudy there."),
    ])


def parallel(sid, variant=0):
    n = 10 + variant
    return sample(sid, "parallel", [
        user(f"Get the weather at 45.4215, -75.6972 and the probability of 5 successes in {n} trials with p 0.5."),
        call(("get_weather_data", {"coordinates": [45.4215, -75.6972]}),
             ("calc_binomial_probability", {"n": n, "k": 5.0, "p": 0.5})),
        tool("get_weather_data", {"temperature": 12.5, "condition": "cloudy"}),
        tool("calc_binomial_probability", {"probability": 0.2461}),
        say("It is 12.5 degrees and cloudy, and the probability is about 0.2461."),
    ])


def dependent(sid, variant=0):
    city = ["Ottawa", "Paris", "Tokyo", "Sydney", "Lima"][variant % 5]
    return sample(sid, "dependent", [
        user("Which city is at 45.4215, -75.6972, and what is its forecast for 3 days?"),
        call(("find_city", {"coordinates": [45.4215, -75.6972]})),
        tool("find_city", {"city": city, "country": "Canada"}),
        call(("get_city_forecast", {"city": city, "days": 3})),
        tool("get_city_forecast", {"summary": "Mild with light rain."}),
        say(f"The nearest city is {city}, and the forecast is mild with light rain."),
    ])


def non_tool(sid, variant=0):
    question = ["Who wrote the novel Middlemarch?", "What is the capital of Australia?",
                "Can you recommend a good book?", "How tall is Mount Everest?",
                "Tell me a short joke."][variant % 5]
    return sample(sid, "non_tool_use", [
        user(question),
        say("None of the available functions can answer that, so I cannot help with it here."),
    ])


def multi_turn_single(sid):
    return sample(sid, "single", [
        user("Set an alarm please."),
        say("The function set_alarm can help, but it lacks the required parameters: time. Please provide it."),
        user("Make it 07:30 every day."),
        call(("set_alarm", {"time": "07:30", "repeat": "daily"})),
        tool("set_alarm", {"alarm_id": "a-1", "status": "success"}),
        say("Your alarm is set for 07:30 every day."),
        user("Thanks!"),
        say("You're welcome!"),
    ])


clean = []
for i in range(5):
    clean.append(single(f"clean-single-{i}", i) if i < 4 else multi_turn_single(f"clean-single-{i}"))
    clean.append(parallel(f"clean-parallel-{i}", i))
    clean.append(dependent(f"clean-dependent-{i}", i))
    clean.append(non_tool(f"clean-nontool-{i}", i))


def fault(rule, s):
    return {"expect": rule, "record": s}


faults = []

s = single("fault-schema")
s["tools"][0]["parameters"]["properties"]["coordinates"]["type"] = "tuple"
faults.append(fault("schema_invalid", s))

s = single("fault-desc")
s["tools"][1]["description"] = ""
faults.append(fault("missing_description", s))

s = single("fault-dangling")
s["tools"][2]["parameters"]["required"].append("label")
faults.append(fault("dangling_required", s))

s = single("fault-unknown-api")
s["turns"][1] = call(("get_weather", {"coordinates": [45.4215, -75.6972]}))
s["turns"][2] = tool("get_weather", {"temperature": 12.5, "condition": "cloudy"})
faults.append(fault("unknown_api", s))

s = parallel("fault-missing-required")
del s["turns"][1]["calls"][1]["arguments"]["p"]
faults.append(fault("missing_required", s))

s = single("fault-unknown-param")
s["turns"][1]["calls"][0]["arguments"]["units"] = "metric"
faults.append(fault("unknown_param", s))

s = single("fault-type")
s["turns"][1]["calls"][0]["arguments"]["coordinates"] = "45.4"
faults.append(fault("type_mismatch", s))

s = multi_turn_single("fault-pattern")
s["turns"][3]["calls"][0]["arguments"]["time"] = "7.30am"
faults.append(fault("pattern_mismatch", s))

s = multi_turn_single("fault-enum")
s["turns"][3]["calls"][0]["arguments"]["repeat"] = "hourly"
faults.append(fault("enum_violation", s))

s = single("")
faults.append(fault("missing_field", s))

s = single("fault-too-long")
s["turns"][3]["content"] = "a" * 4096 + "."
faults.append(fault("response_too_long", s))

s = single("fault-chars")
s["turns"][3]["content"] = "It is 12.5 degrees\u200b and cloudy there."
faults.append(fault("invalid_characters", s))

s = non_tool("fault-mixed")
s["turns"][1]["content"] = "None of the functions apply. 这些工具都不能回答这个问题。"
faults.append(fault("mixed_language", s))

s = single("fault-incomplete")
s["turns"][3]["content"] = "It is 12.5 degrees Celsius and"
faults.append(fault("incomplete_response", s))

s = single("fault-type-label")
s["dialog_type"] = "parallel"
faults.append(fault("dialog_type_mismatch", s))

s = single("fault-name-mismatch")
s["turns"][2]["payload"]["name"] = "calc_binomial_probability"
faults.append(fault("call_response_name_mismatch", s))

s = non_tool("fault-format")
s["turns"][1]["content"] = "get_weather_data(coordinates=[45.4215, -75.6972])"
faults.append(fault("system_format_conflict", s))

s = single("fault-order")
s["turns"].insert(1, user("Also, hurry up."))
faults.append(fault("role_order", s))

s = non_tool("fault-orphan")
s["turns"].insert(0, tool("get_weather_data", {"temperature": 12.5, "condition": "cloudy"}))
faults.append(fault("orphan_tool_response", s))


def finish(rec):
    for t in rec["turns"]:
        if "calls" in t:
            t["call_string"] = call_string(t["calls"])


def dump(name, rows):
    for r in rows:
        finish(r.get("record", r))
    with open(HERE / name, "w", encoding="utf-8") as f:
        for r in rows:
            f.write(json.dumps(r, ensure_ascii=False) + "\n")


dump("clean.jsonl", clean)
dump("faults.jsonl", faults)
