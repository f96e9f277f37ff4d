"""Annotation backend: queue planning plus the HTTP JSON API the
browser client consumes.

Endpoints: GET /next, POST /submit, GET /progress, GET /agreement.
Annotator identity travels in the X-Annotator-Id header; submissions
are appended durably to the store before the ack, and resubmitting an
identical payload acks again without growing the store.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

from fastapi import FastAPI, Header, HTTPException
from fastapi.responses import RedirectResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel

from .core import (
    EXCLUSIVE_RELATIONS,
    AnnotationRecord,
    CoherenceRelation,
    ImageCaptionPair,
    MetaFacet,
    RelationSet,
    UnknownLabelError,
    parse_facet,
    parse_label,
    validate_relation_set,
)
from .corpus import AnnotationStore, append_annotation
from .evaluate.agreement import agreement_summary


class InsufficientAnnotatorsError(ValueError):
    pass


class OverlapTooLargeError(ValueError):
    pass


@dataclass
class AssignmentPlan:
    """Per-annotator ordered queues with a controlled shared subset.

    Overlap pairs go to the first two annotators (both see them, at the
    front of their queues); the rest are partitioned round-robin.
    """

    queues: dict[str, list[str]]
    overlap_ids: list[str]
    overlap_annotators: tuple[str, str] | None
    seed: int

    def total_assignments(self) -> int:
        return sum(len(q) for q in self.queues.values())


def plan_assignments(
    pairs: Sequence[ImageCaptionPair] | Sequence[str],
    annotators: Sequence[str],
    overlap_count: int = 300,
    seed: int = 0,
) -> AssignmentPlan:
    pair_ids = [p if isinstance(p, str) else p.pair_id for p in pairs]
    if not annotators:
        raise InsufficientAnnotatorsError("at least one annotator is required")
    if overlap_count > len(pair_ids):
        raise OverlapTooLargeError(
            f"overlap {overlap_count} exceeds pair count {len(pair_ids)}"
        )
    if overlap_count > 0 and len(annotators) < 2:
        raise InsufficientAnnotatorsError("overlap assignment needs at least two annotators")

    rng = random.Random(seed)
    overlap_ids = sorted(rng.sample(range(len(pair_ids)), overlap_count))
    overlap = [pair_ids[i] for i in overlap_ids]
    shared = set(overlap)
    exclusive = [pid for pid in pair_ids if pid not in shared]

    queues: dict[str, list[str]] = {a: [] for a in annotators}
    overlap_annotators = None
    if overlap:
        overlap_annotators = (annotators[0], annotators[1])
        queues[annotators[0]].extend(overlap)
        queues[annotators[1]].extend(overlap)
    for i, pid in enumerate(exclusive):
        queues[annotators[i % len(annotators)]].append(pid)
    return AssignmentPlan(
        queues=queues,
        overlap_ids=overlap,
        overlap_annotators=overlap_annotators,
        seed=seed,
    )


_RELATION_HELP = {
    CoherenceRelation.VISIBLE: "The text restates what the image shows.",
    CoherenceRelation.SUBJECTIVE: "The text reacts to or evaluates the image.",
    CoherenceRelation.ACTION: "The text elaborates a process or action depicted.",
    CoherenceRelation.STORY: "The text tells a free-standing story or background.",
    CoherenceRelation.META: "The text is about the photo itself (its taking).",
    CoherenceRelation.IRRELEVANT: "Text and image are unrelated.",
    CoherenceRelation.OTHER_TEXT: "The caption is text about text (not this image).",
    CoherenceRelation.OTHER_GIBBERISH: "The caption is not readable language.",
}


def schema_descriptor() -> dict:
    """Label taxonomy the client renders from; nothing hardcoded UI-side."""
    return {
        "relations": [
            {
                "label": rel.value,
                "help": _RELATION_HELP[rel],
                "exclusive": rel in EXCLUSIVE_RELATIONS,
            }
            for rel in CoherenceRelation
        ],
        "facets": [f.value for f in MetaFacet],
        "facet_requires": CoherenceRelation.META.value,
    }


class SubmitPayload(BaseModel):
    pair_id: str
    relations: list[str]
    facets: list[str] = []
    comment: str | None = None
    timestamp: int = 0


@dataclass
class ServiceState:
    pairs: dict[str, ImageCaptionPair]
    plan: AssignmentPlan
    store: AnnotationStore
    done_by: dict[str, set[str]] = field(default_factory=dict)

    def __post_init__(self):
        for rec in self.store.records:
            self.done_by.setdefault(rec.annotator_id, set()).add(rec.pair_id)

    def completed(self, annotator: str) -> set[str]:
        return self.done_by.get(annotator, set())

    def record(self, rec: AnnotationRecord) -> None:
        append_annotation(self.store, rec)
        self.done_by.setdefault(rec.annotator_id, set()).add(rec.pair_id)


def _parse_relation_set(payload: SubmitPayload) -> RelationSet:
    try:
        relations = frozenset(parse_label(r) for r in payload.relations)
        facets = frozenset(parse_facet(f) for f in payload.facets)
    except UnknownLabelError as exc:
        raise HTTPException(status_code=422, detail={"violations": [str(exc)]})
    return RelationSet(relations=relations, facets=facets)


def create_app(
    pairs: Sequence[ImageCaptionPair],
    plan: AssignmentPlan,
    store: AnnotationStore,
    static_dir: str | Path | None = None,
) -> FastAPI:
    state = ServiceState(pairs={p.pair_id: p for p in pairs}, plan=plan, store=store)
    app = FastAPI(title="coherence annotation service")
    app.state.service = state

    def queue_for(annotator_id: str) -> list[str]:
        if annotator_id not in state.plan.queues:
            raise HTTPException(status_code=404, detail=f"unknown annotator {annotator_id!r}")
        return state.plan.queues[annotator_id]

    @app.get("/next")
    def next_item(x_annotator_id: str = Header(...)):
        queue = queue_for(x_annotator_id)
        done = state.completed(x_annotator_id)
        for pid in queue:
            if pid not in done:
                pair = state.pairs[pid]
                return {
                    "status": "pair",
                    "pair": {
                        "pair_id": pair.pair_id,
                        "caption": pair.caption,
                        "image_url": pair.image_ref,
                    },
                    "position": len(done) + 1,
                    "total": len(queue),
                    "schema": schema_descriptor(),
                }
        return {
            "status": "done",
            "completed": len([pid for pid in queue if pid in done]),
            "total": len(queue),
        }

    @app.post("/submit")
    def submit(payload: SubmitPayload, x_annotator_id: str = Header(...)):
        queue = queue_for(x_annotator_id)
        if payload.pair_id not in queue:
            raise HTTPException(
                status_code=409,
                detail=f"pair {payload.pair_id!r} is not assigned to {x_annotator_id!r}",
            )
        labels = _parse_relation_set(payload)
        violations = validate_relation_set(labels)
        if violations:
            raise HTTPException(status_code=422, detail={"violations": violations})
        record = AnnotationRecord(
            pair_id=payload.pair_id,
            annotator_id=x_annotator_id,
            labels=labels,
            comment=payload.comment,
            timestamp=payload.timestamp,
        )
        existing = state.store.get(payload.pair_id, x_annotator_id)
        if existing is not None:
            if (
                existing.labels == record.labels
                and existing.comment == record.comment
            ):
                return {"status": "ok", "duplicate": True}
            raise HTTPException(
                status_code=409,
                detail=f"pair {payload.pair_id!r} already annotated with a different judgment",
            )
        state.record(record)
        return {"status": "ok", "duplicate": False}

    @app.get("/progress")
    def progress():
        per_annotator = {}
        for annotator, queue in state.plan.queues.items():
            done = state.completed(annotator)
            per_annotator[annotator] = {
                "assigned": len(queue),
                "completed": len([pid for pid in queue if pid in done]),
            }
        overlap_done = _overlap_completed(state)
        return {
            "per_annotator": per_annotator,
            "total_assigned": state.plan.total_assignments(),
            "total_completed": sum(v["completed"] for v in per_annotator.values()),
            "overlap_completed_both": len(overlap_done),
        }

    @app.get("/agreement")
    def agreement():
        overlap_done = _overlap_completed(state)
        if not overlap_done:
            return {"defined": False, "n_pairs": 0, "mean_kappa": None, "per_label": {}}
        a, b = state.plan.overlap_annotators
        recs_a = [state.store.get(pid, a) for pid in overlap_done]
        recs_b = [state.store.get(pid, b) for pid in overlap_done]
        summary = agreement_summary(recs_a, recs_b)
        return {
            "defined": summary.mean_kappa is not None,
            "n_pairs": summary.n_items,
            "mean_kappa": summary.mean_kappa,
            "per_label": {
                label: {
                    "kappa": rep.kappa,
                    "p_observed": rep.p_observed,
                    "p_expected": rep.p_expected,
                    "degenerate": rep.degenerate,
                }
                for label, rep in summary.per_label.items()
            },
        }

    if static_dir is not None:
        app.mount("/ui", StaticFiles(directory=str(static_dir), html=True), name="ui")

        @app.get("/")
        def index():
            return RedirectResponse(url="/ui/")

    return app


def _overlap_completed(state: ServiceState) -> list[str]:
    """Overlap pairs both designated annotators have finished."""
    if state.plan.overlap_annotators is None:
        return []
    a, b = state.plan.overlap_annotators
    done_a = state.completed(a)
    done_b = state.completed(b)
    return [pid for pid in state.plan.overlap_ids if pid in done_a and pid in done_b]
