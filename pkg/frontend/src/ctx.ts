import { Session, ViewName } from "./session.js";

export interface ViewContext {
  session: Session;
  navigate: (view: ViewName, param?: number) => void;
  notifyError: (error: unknown) => void;
  clearError: () => void;
}

export interface RenderedView {
  /** Called when the user navigates away; stops pollers. */
  stop?: () => void;
}
