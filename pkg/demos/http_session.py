"""Drive the tutoring journey through the HTTP surface, in process.

Builds the FastAPI app with the bundled mock tutor and talks to it through
a test client, printing each request the way a web client would make it.
No server or network is needed. Run it with:

    python3 demos/http_session.py
"""

import tempfile

from fastapi.testclient import TestClient

from tutorkit.bank import bundled_bank
from tutorkit.service import ServiceConfig, create_app


def main():
    bank = bundled_bank()  # used here only to look up answer keys
    config = ServiceConfig(data_dir=tempfile.mkdtemp(prefix="tutorkit-http-"))
    client = TestClient(create_app(config))

    doc = client.post("/students", json={"student_id": "ada"}).json()
    sid, token = doc["student_id"], doc["token"]
    headers = {"Authorization": f"Bearer {token}"}
    print(f"POST /students -> id {sid}")

    survey = {
        "student_id": sid,
        "perception": "sensory",
        "processing": "reflective",
        "understanding": "sequential",
        "self_assessment": {
            "Pronouns": "Weak",
            "Punctuation": "Moderate",
            "Transitions": "Moderate",
        },
        "demographics": {"age": 19},
    }
    view = client.post(f"/students/{sid}/survey", json=survey, headers=headers).json()
    print(f"POST /survey -> phase {view['phase']}")

    form = client.get(f"/students/{sid}/pretest", headers=headers).json()["form"]
    answers = {item["item_id"]: bank.get(item["item_id"]).answer for item in form["items"]}
    view = client.post(
        f"/students/{sid}/pretest", json={"answers": answers}, headers=headers
    ).json()
    print(
        f"POST /pretest -> phase {view['phase']}, "
        f"first concept {view['current_concept']}, "
        f"{len(view['exercises'])} exercises selected"
    )

    while True:
        view = client.post(f"/students/{sid}/session", headers=headers).json()
        print(f"POST /session -> tutor: {view['tutor_message'][:60]}...")
        finished = view["finished"]
        while not finished:
            view = client.post(
                f"/students/{sid}/chat",
                json={"text": "My answer is B."},
                headers=headers,
            ).json()
            finished = view["finished"]
        print(f"POST /chat x{view['session_index']} -> session closed")

        form = client.get(f"/students/{sid}/posttest", headers=headers).json()["form"]
        answers = {
            item["item_id"]: bank.get(item["item_id"]).answer for item in form["items"]
        }
        view = client.post(
            f"/students/{sid}/posttest", json={"answers": answers}, headers=headers
        ).json()
        report = view["report"]
        print(
            f"POST /posttest -> {report['concept']} gain {report['gain']:+.3f}, "
            f"phase {view['phase']}"
        )
        if view["phase"] == "Completed":
            break
        view = client.post(f"/students/{sid}/concept", json={}, headers=headers).json()
        print(f"POST /concept -> next up {view['current_concept']}")

    profile = client.get(f"/students/{sid}/profile", headers=headers).json()["profile"]
    print(f"GET /profile -> sessions completed: {profile['sessions_completed']}")
    events = client.get(f"/students/{sid}/transcript", headers=headers).json()["events"]
    print(f"GET /transcript -> {len(events)} events on file")


if __name__ == "__main__":
    main()
