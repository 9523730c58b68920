// Wire protocol types and client. The UI computes nothing: every value it
// shows is a verbatim field from these payloads.

export type CellValue = number | string | null;

export interface ColumnInfo {
  name: string;
  role: string;
  goal: string | null;
  lo: number | null;
  hi: number | null;
  emphasized: boolean;
}

export interface DatasetInfo {
  id: string;
  rows: number;
  budget: number;
  columns: ColumnInfo[];
}

export interface RowRender {
  id: number;
  columns: string[];
  values: CellValue[];
  objectives: Record<string, number> | null;
}

export interface Question {
  a: RowRender;
  b: RowRender;
  asked: number;
  budget: number;
}

export interface SessionView {
  session_id: string;
  status: "awaiting_answer" | "finished";
  asked: number;
  budget: number;
  question: Question | null;
  best: RowRender | null;
  rule: string | null;
  prototypes: RowRender[] | null;
  trace: string[];
}

export interface CreateSessionResponse {
  session_id: string;
  question: Question;
}

export class ApiError extends Error {
  constructor(public status: number, message: string) {
    super(message);
  }
}

async function request<T>(base: string, path: string, init?: RequestInit): Promise<T> {
  let res: Response;
  try {
    res = await fetch(base + path, init);
  } catch (err) {
    throw new ApiError(0, `service unreachable: ${String(err)}`);
  }
  if (!res.ok) {
    let detail = res.statusText;
    try {
      const body = await res.json();
      if (body && body.detail) detail = String(body.detail);
    } catch {
      // keep statusText
    }
    throw new ApiError(res.status, detail);
  }
  return (await res.json()) as T;
}

export class SessionClient {
  constructor(public base: string = "") {}

  listDatasets(): Promise<{ datasets: DatasetInfo[] }> {
    return request(this.base, "/datasets");
  }

  createSession(datasetId: string, seed?: number, budget?: number): Promise<CreateSessionResponse> {
    const body: Record<string, unknown> = { dataset_id: datasetId };
    if (seed !== undefined) body.seed = seed;
    if (budget !== undefined) body.budget = budget;
    return request(this.base, "/session", {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(body),
    });
  }

  answer(sessionId: string, choice: "A" | "B"): Promise<SessionView> {
    return request(this.base, `/session/${sessionId}/answer`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ choice }),
    });
  }

  poll(sessionId: string): Promise<SessionView> {
    return request(this.base, `/session/${sessionId}`);
  }
}
