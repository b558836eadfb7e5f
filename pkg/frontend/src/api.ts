import type {
  EvaluateResponse,
  GenerateConfig,
  ModelResponse,
  ProjectInfo,
  Status,
} from "./types";

export class ApiError extends Error {
  constructor(
    public status: number,
    message: string,
  ) {
    super(message);
  }
}

/** 409: the model changed under us; the caller should reload and retry. */
export class StaleVersionError extends ApiError {
  constructor(message: string) {
    super(409, message);
  }
}

const VERSION_HEADER = "X-Model-Version";

async function parseError(response: Response): Promise<ApiError> {
  let message = `${response.status}`;
  try {
    const body = (await response.json()) as { error?: string };
    if (body.error) message = body.error;
  } catch {
    /* non-JSON error body */
  }
  if (response.status === 409) return new StaleVersionError(message);
  return new ApiError(response.status, message);
}

/**
 * Thin typed client for the review service. All model mutations go through
 * the documented endpoints and carry the last seen version so concurrent
 * edits surface as StaleVersionError instead of silent overwrites.
 */
export class ApiClient {
  constructor(private baseUrl: string = "") {}

  private async request<T>(
    method: string,
    path: string,
    body?: unknown,
    version?: number,
  ): Promise<T> {
    const headers: Record<string, string> = {};
    if (body !== undefined) headers["Content-Type"] = "application/json";
    if (version !== undefined) headers[VERSION_HEADER] = String(version);
    const response = await fetch(this.baseUrl + path, {
      method,
      headers,
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    if (!response.ok) throw await parseError(response);
    return (await response.json()) as T;
  }

  listProjects(): Promise<ProjectInfo[]> {
    return this.request("GET", "/projects");
  }

  createProject(name: string, description: string): Promise<ProjectInfo> {
    return this.request("POST", "/projects", { name, description });
  }

  getProject(id: string): Promise<ProjectInfo> {
    return this.request("GET", `/projects/${id}`);
  }

  getModel(id: string): Promise<ModelResponse> {
    return this.request("GET", `/projects/${id}/model`);
  }

  generate(id: string, config: GenerateConfig, version?: number): Promise<ModelResponse> {
    return this.request("POST", `/projects/${id}/generate`, { config }, version);
  }

  setStatus(
    id: string,
    elementId: string,
    status: Status,
    version: number,
  ): Promise<ModelResponse> {
    return this.request(
      "PATCH",
      `/projects/${id}/elements/${elementId}`,
      { status },
      version,
    );
  }

  regenerate(
    id: string,
    task: "classes" | "assoc" | "inherit",
    version: number,
  ): Promise<ModelResponse> {
    return this.request("POST", `/projects/${id}/regenerate`, { task }, version);
  }

  exportPath(id: string, format: "canonical" | "plantuml", acceptedOnly: boolean): string {
    const params = new URLSearchParams({
      format,
      accepted_only: acceptedOnly ? "true" : "false",
    });
    return `${this.baseUrl}/projects/${id}/export?${params.toString()}`;
  }

  async exportDocument(
    id: string,
    format: "canonical" | "plantuml",
    acceptedOnly: boolean,
  ): Promise<string> {
    const response = await fetch(this.exportPath(id, format, acceptedOnly));
    if (!response.ok) throw await parseError(response);
    return response.text();
  }

  evaluate(id: string, oracleDocument: string): Promise<EvaluateResponse> {
    return this.request("POST", `/projects/${id}/evaluate`, { oracle: oracleDocument });
  }
}

/** Repeatedly refresh while a long request is in flight (2 s cadence). */
export async function pollWhile<T>(
  pending: Promise<T>,
  refresh: () => void | Promise<void>,
  intervalMs = 2000,
): Promise<T> {
  const timer = setInterval(() => {
    void refresh();
  }, intervalMs);
  try {
    return await pending;
  } finally {
    clearInterval(timer);
  }
}
