"""Walk an annotation batch through claim, edit, and peer verification.

The store is an append-only event log; reopening the file replays it to
the identical state. Edits are span replacements in code points, and no
annotator may verify their own edit.
"""
import tempfile
from pathlib import Path

from contextcap import AnnotationStore

ROWS = [
    {"image_uri": "http://img/1.jpg", "caption": "A crowd gathers at the station",
     "context": "Commuters faced delays after a signal failure on Monday."},
    {"image_uri": "http://img/2.jpg", "caption": "Trail winds through a quiet forest",
     "context": "The park service reopened the northern loop this weekend."},
]


def main():
    log = Path(tempfile.mkdtemp(prefix="contextcap-demo-")) / "tasks.jsonl"
    store = AnnotationStore(log, claim_timeout=1800)

    ids, skipped = store.create_tasks(ROWS)
    print(f"created {len(ids)} tasks ({skipped} duplicates skipped)")

    tid = ids[0]
    store.claim(tid, "ann-1")
    task = store.get_task(tid)
    print(f"claimed by {task['claimant']}: {task['caption']!r}")

    # Replace "gathers" (code points 8..15) so the caption contradicts
    # the image: edited captions become manual hard negatives on export.
    task = store.submit_edit(tid, "ann-1", 8, 15, "disperses")
    print("edited  :", task["resulting_caption"])

    # A second person signs off; the author cannot.
    task = store.verify(tid, "ann-2", "accept")
    print("verified:", task["status"], "by", task["verifier"])

    pending = store.list_tasks(status="pending")
    print(f"{len(pending)} task(s) still pending")

    for inst in store.export(pair_positives=True):
        print(f"export  : {inst.label.value:12s} {inst.caption}")

    # Same log, fresh process: replay reproduces the state byte for byte.
    replica = AnnotationStore(log, claim_timeout=1800)
    assert replica.state_snapshot() == store.state_snapshot()
    print("replay  : snapshot identical after reopen")
    store.close()
    replica.close()
    print("\nserve the same store over HTTP with:")
    print(f"  python3 -m contextcap serve --store {log} --port 8750")


if __name__ == "__main__":
    main()
