"""Pydantic request/response models for the HTTP API."""

from __future__ import annotations

from typing import Any

from pydantic import BaseModel, Field


class FamilySpec(BaseModel):
    delta: int
    z: list[int] | str
    variant: bool = False


class CreateSessionRequest(BaseModel):
    text: str | None = None
    family: FamilySpec | None = None
    name: str = ""
    notes: str = ""


class ActionRequest(BaseModel):
    op: str
    params: dict[str, Any] = Field(default_factory=dict)


class SeekRequest(BaseModel):
    cursor: int


class ForkRequest(BaseModel):
    name: str = ""


class ActionResponse(BaseModel):
    index: int
    snapshot: str
    summary: dict[str, Any]


class SessionSummary(BaseModel):
    id: str
    name: str
    cursor: int
    length: int
    updated: float


class ErrorBody(BaseModel):
    code: str
    message: str
    details: dict[str, Any] = Field(default_factory=dict)
