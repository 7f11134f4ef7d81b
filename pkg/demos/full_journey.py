"""Walk one student through the whole tutoring journey, offline.

The tutor is the bundled scripted mock, so the demo runs without network
access or credentials and is fully deterministic. Run it with:

    python3 demos/full_journey.py
"""

import tempfile

from tutorkit.bank import bundled_bank
from tutorkit.gateway import MockChatProvider, bundled_demo_script
from tutorkit.orchestrator import SessionRunner
from tutorkit.storage import EventStore


def banner(text):
    print()
    print(f"=== {text} ===")


def main():
    bank = bundled_bank()
    data_dir = tempfile.mkdtemp(prefix="tutorkit-demo-")
    runner = SessionRunner(
        "demo-student",
        bank,
        MockChatProvider(bundled_demo_script()),
        EventStore(data_dir),
    )

    banner("Onboarding")
    runner.submit_survey(
        {
            "student_id": "demo-student",
            "perception": "intuitive",
            "processing": "active",
            "understanding": "global",
            "self_assessment": {
                "Pronouns": "Moderate",
                "Punctuation": "Weak",
                "Transitions": "Strong",
            },
            "demographics": {"age": 21, "native_language": "Spanish"},
        }
    )
    style = runner.profile.style
    print(f"learning style: {style.display}")

    banner("Pre-test (15 questions, first shown below)")
    form = runner.pretest_form()
    first = bank.get(form.item_ids[0])
    print(first.stem)
    for choice in first.choices:
        print(f"  {choice.label}. {choice.text}")
    # The demo student answers everything correctly.
    answers = {item_id: bank.get(item_id).answer for item_id in form.item_ids}
    runner.submit_pretest(answers)
    for concept, state in runner.profile.concept_states.items():
        print(
            f"{concept:<12} said {state.self_reported.value:<8} "
            f"measured {state.measured.value:<8} -> {state.discrepancy}"
        )

    while True:
        concept = runner.state.current_concept
        banner(f"Tutoring session {runner.state.session_index}: {concept}")
        _, opening = runner.start_session()
        print(f"tutor:   {opening}")
        finished = False
        while not finished:
            message = "I think the answer is B."
            print(f"student: {message}")
            reply, finished = runner.handle_student_message(message)
            print(f"tutor:   {reply}")
        summary = runner.profile.summaries[-1]
        print(f"[summary on file] {summary.specific_topics[:70]}...")

        banner(f"Post-test: {concept}")
        post_form = runner.posttest_form()
        runner.submit_posttest(
            {item_id: bank.get(item_id).answer for item_id in post_form.item_ids}
        )
        report = runner.report(concept)
        print(
            f"ability {report.theta_pre:+.2f} -> {report.theta_post:+.2f}, "
            f"expected correctness {report.prob_pre:.2f} -> {report.prob_post:.2f} "
            f"(gain {report.gain:+.3f})"
        )
        if runner.state.phase.value == "Completed":
            break
        runner.choose_concept()

    banner("Journey complete")
    print(f"concepts completed: {', '.join(runner.state.completed_concepts)}")
    print(f"sessions completed: {runner.profile.sessions_completed}")
    print(f"event log at: {data_dir}/students/demo-student/events.ndjson")


if __name__ == "__main__":
    main()
