/** Thin fetch client for the annotation service.
 *
 * Server rejections become ApiError (with any rule violations the
 * server named); transport failures become NetworkError so the app can
 * offer a retry without losing the annotator's selection.
 */

import type {
  AgreementResponse,
  NextResponse,
  ProgressResponse,
  SubmitAck,
  SubmitPayload,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    public status: number,
    public detail: unknown,
    public violations: string[],
  ) {
    super(violations.length ? violations.join("; ") : `server error ${status}`);
    this.name = "ApiError";
  }
}

export class NetworkError extends Error {
  constructor(cause: unknown) {
    super(`request failed: ${String(cause)}`);
    this.name = "NetworkError";
  }
}

function extractViolations(body: unknown): string[] {
  if (body && typeof body === "object" && "detail" in body) {
    const detail = (body as { detail: unknown }).detail;
    if (detail && typeof detail === "object" && "violations" in detail) {
      const v = (detail as { violations: unknown }).violations;
      if (Array.isArray(v)) return v.map(String);
    }
    if (typeof detail === "string") return [detail];
  }
  return [];
}

export class ApiClient {
  constructor(
    private baseUrl: string,
    public annotator: string,
  ) {}

  async next(): Promise<NextResponse> {
    return this.request("/next", { method: "GET" });
  }

  async submit(payload: SubmitPayload): Promise<SubmitAck> {
    return this.request("/submit", {
      method: "POST",
      body: JSON.stringify(payload),
    });
  }

  async progress(): Promise<ProgressResponse> {
    return this.request("/progress", { method: "GET" });
  }

  async agreement(): Promise<AgreementResponse> {
    return this.request("/agreement", { method: "GET" });
  }

  private async request(path: string, init: RequestInit): Promise<any> {
    let res: Response;
    try {
      res = await fetch(this.baseUrl + path, {
        ...init,
        headers: {
          "X-Annotator-Id": this.annotator,
          "Content-Type": "application/json",
        },
      });
    } catch (cause) {
      throw new NetworkError(cause);
    }
    if (!res.ok) {
      const body = await res.json().catch(() => null);
      const detail =
        body && typeof body === "object" && "detail" in body
          ? (body as { detail: unknown }).detail
          : body;
      throw new ApiError(res.status, detail, extractViolations(body));
    }
    return res.json();
  }
}
